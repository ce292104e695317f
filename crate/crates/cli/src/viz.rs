//! Plots of learned distributions: equirectangular directional pdfs and
//! Gaussian splats over a wireframe of the scene.

use std::f64::consts::PI;

use g3d_core::gmath::GaussianMixture;
use g3d_core::render::Image;
use g3d_core::sampling::Frame;
use g3d_core::scene::{Scene, Shape};
use g3d_core::{Rgb, Vec3};

use crate::image_io::heat_color;

/// Direction at continuous equirect coordinates. Rows run from +y (top) to
/// -y, columns sweep the azimuth from +x through +z.
pub fn equirect_direction(x: f64, y: f64, width: usize, height: usize) -> Vec3 {
    let theta = PI * y / height as f64;
    let phi = 2.0 * PI * x / width as f64;
    Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin())
}

/// Inverse of [`equirect_direction`] for a unit vector.
pub fn direction_to_equirect(d: Vec3, width: usize, height: usize) -> (f64, f64) {
    let theta = d.y.clamp(-1.0, 1.0).acos();
    let phi = d.z.atan2(d.x).rem_euclid(2.0 * PI);
    (phi / (2.0 * PI) * width as f64, theta / PI * height as f64)
}

/// Exact solid angle of one pixel in `row`.
pub fn pixel_solid_angle(row: usize, width: usize, height: usize) -> f64 {
    let t0 = PI * row as f64 / height as f64;
    let t1 = PI * (row + 1) as f64 / height as f64;
    2.0 * PI / width as f64 * (t0.cos() - t1.cos())
}

/// `pdf` evaluated at every pixel center, row-major.
pub fn directional_heatmap<F: Fn(Vec3) -> f64>(pdf: F, width: usize, height: usize) -> Vec<f64> {
    (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| pdf(equirect_direction(x as f64 + 0.5, y as f64 + 0.5, width, height)))
        .collect()
}

/// Solid-angle weighted sum of a directional heatmap.
pub fn heatmap_integral(values: &[f64], width: usize, height: usize) -> f64 {
    values
        .chunks(width)
        .enumerate()
        .map(|(row, v)| v.iter().sum::<f64>() * pixel_solid_angle(row, width, height))
        .sum()
}

fn draw_line(img: &mut Image, a: (f64, f64), b: (f64, f64), color: Rgb) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).clamp(1, 1 << 14);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let (x, y) = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
        if x >= 0.0 && y >= 0.0 && (x as usize) < img.width && (y as usize) < img.height {
            img.set(x as usize, y as usize, color);
        }
    }
}

fn draw_segment(img: &mut Image, scene: &Scene, a: Vec3, b: Vec3, color: Rgb) {
    if let (Some(pa), Some(pb)) = (scene.camera.project(a), scene.camera.project(b)) {
        draw_line(img, pa, pb, color);
    }
}

/// Edges of every triangle and three great circles per sphere.
pub fn wireframe(scene: &Scene) -> Image {
    let cam = &scene.camera;
    let mut img = Image::new(cam.width, cam.height);
    for s in &scene.surfaces {
        let color = if s.caster { Rgb::new(0.5, 0.5, 0.6) } else { Rgb::splat(0.25) };
        for shape in &s.shapes {
            match shape {
                Shape::Triangle(t) => {
                    for k in 0..3 {
                        draw_segment(&mut img, scene, t.v[k], t.v[(k + 1) % 3], color);
                    }
                }
                Shape::Sphere(sp) => {
                    const N: usize = 48;
                    for axis in [Vec3::X, Vec3::Y, Vec3::Z] {
                        let f = Frame::from_normal(axis);
                        let at = |i: usize| {
                            let a = 2.0 * PI * i as f64 / N as f64;
                            sp.center + f.to_world(Vec3::new(a.cos(), a.sin(), 0.0)) * sp.radius
                        };
                        for i in 0..N {
                            draw_segment(&mut img, scene, at(i), at(i + 1), color);
                        }
                    }
                }
            }
        }
    }
    img
}

/// Each component as a soft disc of one projected sigma, colored by its
/// share of the total splat intensity, over the scene wireframe.
pub fn splat_mixtures(scene: &Scene, mixtures: &[&GaussianMixture]) -> Image {
    let cam = &scene.camera;
    let (w, h) = (cam.width, cam.height);
    let mut acc = vec![0.0; w * h];
    for m in mixtures {
        for c in m.components() {
            let mu = c.gaussian.mu;
            let Some(center) = cam.project(mu) else { continue };
            let side = Frame::from_normal((mu - cam.position).normalize()).s;
            let Some(edge) = cam.project(mu + side * c.gaussian.sigma) else { continue };
            let r = ((edge.0 - center.0).hypot(edge.1 - center.1)).max(0.75);
            let peak = c.weight / (r * r);
            let reach = (3.0 * r).ceil() as i64;
            let (cx, cy) = (center.0 as i64, center.1 as i64);
            for y in (cy - reach).max(0)..(cy + reach + 1).min(h as i64) {
                for x in (cx - reach).max(0)..(cx + reach + 1).min(w as i64) {
                    let dx = x as f64 + 0.5 - center.0;
                    let dy = y as f64 + 0.5 - center.1;
                    acc[y as usize * w + x as usize] += peak * (-(dx * dx + dy * dy) / (2.0 * r * r)).exp();
                }
            }
        }
    }
    let max = acc.iter().copied().fold(0.0, f64::max);
    let mut img = wireframe(scene);
    if max > 0.0 {
        for (px, &v) in img.data.iter_mut().zip(&acc) {
            let t = v / max;
            if t > 1e-3 {
                let a = t.sqrt();
                *px = *px * (1.0 - a) + heat_color(t) * a;
            }
        }
    }
    img
}
