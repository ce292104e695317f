//! Photon emission: a guided branch blended with the light's own uniform
//! emission.

use std::f64::consts::PI;

use rand::Rng;

use crate::gmath::PlaneFrame;
use crate::guide::{LightGuide, PssState};
use crate::sampling::{concentric_disk, cosine_hemisphere, uniform_sphere, Frame, INV_4PI};
use crate::scene::{BoundingSphere, Light};
use crate::vec3::{Rgb, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmissionSample {
    pub x0: Vec3,
    pub omega: Vec3,
    /// Positional times directional density. Excludes the light selection
    /// probability.
    pub pdf: f64,
    /// Intensity (point), radiance times cosine (rect) or irradiance
    /// (directional). Divide by `pdf` for the photon's power.
    pub flux: Rgb,
}

/// Plane through the scene center perpendicular to an infinite light.
pub fn light_plane(light: &Light, bounds: &BoundingSphere) -> Option<PlaneFrame> {
    match *light {
        Light::Directional { direction, .. } => Some(PlaneFrame::new(bounds.center, direction)),
        _ => None,
    }
}

/// The blend weight actually used: zero when the guide has nothing to offer
/// for this light type.
pub fn effective_beta(light: &Light, guide: &LightGuide, beta: f64) -> f64 {
    let usable = if light.is_infinite() {
        guide.guides_plane()
    } else {
        guide.guides_directions()
    };
    if usable {
        beta
    } else {
        0.0
    }
}

fn flux_of(light: &Light, omega: Vec3) -> Rgb {
    match *light {
        Light::Point { intensity, .. } => intensity,
        Light::Rect {
            radiance, normal, ..
        } => radiance * omega.dot(normal).max(0.0),
        Light::Directional { irradiance, .. } => irradiance,
    }
}

pub fn emit<R: Rng + ?Sized>(
    light: &Light,
    guide: &LightGuide,
    beta: f64,
    bounds: &BoundingSphere,
    rng: &mut R,
) -> EmissionSample {
    let beta = effective_beta(light, guide, beta);
    // Always consumed, so beta = 0 replays the unguided random stream.
    let guided = rng.random::<f64>() < beta;
    let (x0, omega) = match *light {
        Light::Point { position, .. } => {
            let w = if guided {
                guide.sample_direction(position, rng)
            } else {
                uniform_sphere(rng.random(), rng.random())
            };
            (position, w)
        }
        Light::Rect { normal, .. } => {
            let x0 = light.position_on(rng.random(), rng.random()).expect("finite light");
            let w = if guided {
                guide.sample_direction(x0, rng)
            } else {
                Frame::from_normal(normal).to_world(cosine_hemisphere(rng.random(), rng.random()))
            };
            (x0, w)
        }
        Light::Directional { direction, .. } => {
            let plane = light_plane(light, bounds).expect("infinite light");
            let p = if guided {
                guide.sample_plane(&plane, rng)
            } else {
                let (a, b) = concentric_disk(rng.random(), rng.random());
                [a * bounds.radius, b * bounds.radius]
            };
            (plane.to_world(p) - direction * bounds.radius, direction)
        }
    };
    EmissionSample {
        x0,
        omega,
        pdf: emission_pdf(light, guide, beta, bounds, x0, omega),
        flux: flux_of(light, omega),
    }
}

/// Density [`emit`] reports for `(x0, omega)`.
pub fn emission_pdf(
    light: &Light,
    guide: &LightGuide,
    beta: f64,
    bounds: &BoundingSphere,
    x0: Vec3,
    omega: Vec3,
) -> f64 {
    let beta = effective_beta(light, guide, beta);
    let guided = |f: &dyn Fn() -> f64| if beta > 0.0 { beta * f() } else { 0.0 };
    match *light {
        Light::Point { .. } => guided(&|| guide.direction_pdf(x0, omega)) + (1.0 - beta) * INV_4PI,
        Light::Rect { normal, area, .. } => {
            let uniform = omega.dot(normal).max(0.0) / PI;
            (guided(&|| guide.direction_pdf(x0, omega)) + (1.0 - beta) * uniform) / area
        }
        Light::Directional { .. } => {
            let plane = light_plane(light, bounds).expect("infinite light");
            let p = plane.to_plane(x0);
            let r = bounds.radius;
            let disk = if p[0] * p[0] + p[1] * p[1] <= r * r * (1.0 + 1e-9) {
                1.0 / (PI * r * r)
            } else {
                0.0
            };
            guided(&|| guide.plane_pdf(&plane, p)) + (1.0 - beta) * disk
        }
    }
}

/// Unguided emission driven by primary-sample coordinates: `v[1], v[2]` pick
/// the position and `v[3], v[4]` the direction.
pub fn emit_pss(light: &Light, bounds: &BoundingSphere, v: &PssState) -> EmissionSample {
    let (x0, omega) = match *light {
        Light::Point { position, .. } => (position, uniform_sphere(v[3], v[4])),
        Light::Rect { normal, .. } => (
            light.position_on(v[1], v[2]).expect("finite light"),
            Frame::from_normal(normal).to_world(cosine_hemisphere(v[3], v[4])),
        ),
        Light::Directional { direction, .. } => {
            let plane = light_plane(light, bounds).expect("infinite light");
            let (a, b) = concentric_disk(v[1], v[2]);
            let p = [a * bounds.radius, b * bounds.radius];
            (plane.to_world(p) - direction * bounds.radius, direction)
        }
    };
    EmissionSample {
        x0,
        omega,
        pdf: emission_pdf(light, &LightGuide::Uniform, 0.0, bounds, x0, omega),
        flux: flux_of(light, omega),
    }
}
