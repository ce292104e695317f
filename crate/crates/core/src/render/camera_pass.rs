//! Eye paths: specular chains to the first diffuse surface, plus direct light there.

use std::f64::consts::PI;

use rand::Rng;

use super::trace::specular_scatter;
use crate::scene::{Light, Material, Ray, Scene};
use crate::vec3::{Rgb, Vec3};

/// First diffuse surface seen through a pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisiblePoint {
    pub p: Vec3,
    /// Shading normal flipped toward the viewer.
    pub n: Vec3,
    pub albedo: Rgb,
    pub throughput: Rgb,
    pub surface: usize,
    pub receiver: bool,
}

pub fn trace_eye<R: Rng + ?Sized>(scene: &Scene, mut ray: Ray, max_depth: usize, rng: &mut R) -> Option<VisiblePoint> {
    for _ in 0..max_depth {
        let hit = scene.intersect(&ray)?;
        let s = &scene.surfaces[hit.surface];
        if let Material::Diffuse { albedo } = s.material {
            let n = if hit.n.dot(ray.dir) > 0.0 { -hit.n } else { hit.n };
            return Some(VisiblePoint {
                p: hit.p,
                n,
                albedo,
                throughput: Rgb::WHITE,
                surface: hit.surface,
                receiver: s.receiver,
            });
        }
        let d = specular_scatter(&s.material, ray.dir, hit.n, rng.random())?;
        ray = Ray::new(scene.spawn(hit.p, hit.n, d), d);
    }
    None
}

/// Direct lighting with shadow rays. Every light is evaluated once,
/// rect lights at one uniform point. Specular occluders block it.
pub fn direct_light<R: Rng + ?Sized>(scene: &Scene, vp: &VisiblePoint, rng: &mut R) -> Rgb {
    let brdf = vp.albedo * (1.0 / PI);
    let mut total = Rgb::BLACK;
    for light in &scene.lights {
        let (dir, dist, e) = match *light {
            Light::Point {
                position,
                intensity,
            } => {
                let d = position - vp.p;
                let r2 = d.length_squared();
                (d / r2.sqrt(), r2.sqrt(), intensity * (1.0 / r2))
            }
            Light::Rect {
                radiance,
                normal,
                area,
                ..
            } => {
                let y = light.position_on(rng.random(), rng.random()).expect("finite light");
                let d = y - vp.p;
                let r2 = d.length_squared();
                let w = d / r2.sqrt();
                let cos_l = (-w).dot(normal).max(0.0);
                (w, r2.sqrt(), radiance * (cos_l * area / r2))
            }
            Light::Directional {
                direction,
                irradiance,
            } => (-direction, f64::INFINITY, irradiance),
        };
        let cos = dir.dot(vp.n);
        if cos <= 0.0 || e.is_black() {
            continue;
        }
        let origin = scene.spawn(vp.p, vp.n, dir);
        if scene.unoccluded(origin, dir, dist) {
            total += e * brdf * cos;
        }
    }
    total * vp.throughput
}
