//! Solid-angle density of an isotropic 3D Gaussian seen from an observation
//! point, and the matching sampler.
//!
//! Writing `x - x0 = r * omega` and integrating the Gaussian along the ray
//! gives, with `c = omega . z`, `z = (mu - x0) / d`:
//!
//! ```text
//! f(omega) = s^2 e^{-d^2/2s^2} d c
//!          + sqrt(pi/2) s e^{-d^2 (1 - c^2)/2s^2} (s^2 + d^2 c^2) (1 + erf(d c / (sqrt 2 s)))
//! F(omega) = f(omega) / (2 pi s^2)^{3/2}
//! ```
//!
//! Projecting a point drawn from the Gaussian onto the unit sphere around
//! `x0` produces directions distributed exactly as `F`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use super::erf::one_plus_erf;
use super::gaussian::{Gaussian3, GaussianMixture};
use crate::vec3::Vec3;

/// North pole used when the observation point coincides with the mean.
pub const DEGENERATE_POLE: Vec3 = Vec3::Z;

/// Per-component distance and pole as seen from `x0`.
#[derive(Clone, Debug)]
pub struct DirectionalView {
    pub x0: Vec3,
    pub poles: Vec<(f64, Vec3)>,
}

impl DirectionalView {
    pub fn new(m: &GaussianMixture, x0: Vec3) -> Self {
        Self {
            x0,
            poles: m
                .components()
                .iter()
                .map(|c| pole(&c.gaussian, x0))
                .collect(),
        }
    }
}

/// `(d, z)` for one Gaussian seen from `x0`.
#[inline]
pub fn pole(g: &Gaussian3, x0: Vec3) -> (f64, Vec3) {
    let v = g.mu - x0;
    let d = v.length();
    if d > 0.0 {
        (d, v / d)
    } else {
        (0.0, DEGENERATE_POLE)
    }
}

/// Unnormalized directional density `f` for distance `d`, width `sigma` and
/// `cos_theta` relative to the pole.
pub fn unnormalized_directional(d: f64, sigma: f64, cos_theta: f64) -> f64 {
    let c = cos_theta.clamp(-1.0, 1.0);
    let s2 = sigma * sigma;
    let dc = d * c;
    let sin2 = (1.0 - c * c).max(0.0);
    let inv_2s2 = 1.0 / (2.0 * s2);
    let first = s2 * (-d * d * inv_2s2).exp() * dc;
    let second = (PI / 2.0).sqrt()
        * sigma
        * (-d * d * sin2 * inv_2s2).exp()
        * (s2 + dc * dc)
        * one_plus_erf(dc * FRAC_1_SQRT_2 / sigma);
    (first + second).max(0.0)
}

/// Normalized solid-angle density (sr^-1) for `(d, sigma, cos_theta)`.
#[inline]
pub fn directional_pdf(d: f64, sigma: f64, cos_theta: f64) -> f64 {
    unnormalized_directional(d, sigma, cos_theta) / (2.0 * PI * sigma * sigma).powf(1.5)
}

pub fn directional_pdf_component(g: &Gaussian3, x0: Vec3, omega: Vec3) -> f64 {
    let (d, z) = pole(g, x0);
    directional_pdf(d, g.sigma, omega.dot(z))
}

pub fn directional_pdf_mixture(m: &GaussianMixture, x0: Vec3, omega: Vec3) -> f64 {
    m.components()
        .iter()
        .map(|c| c.weight * directional_pdf_component(&c.gaussian, x0, omega))
        .sum()
}

/// Direction toward a point drawn from `g`. Draws that land exactly on `x0`
/// are discarded and redrawn.
pub fn sample_direction<R: Rng + ?Sized>(g: &Gaussian3, x0: Vec3, rng: &mut R) -> Vec3 {
    loop {
        let v = g.sample_point(rng) - x0;
        let len = v.length();
        if len > 0.0 && len.is_finite() {
            return v / len;
        }
    }
}

/// Picks a component by weight, samples a direction from it, and returns the
/// direction with the full mixture pdf.
pub fn sample_direction_mixture<R: Rng + ?Sized>(
    m: &GaussianMixture,
    x0: Vec3,
    rng: &mut R,
) -> (Vec3, f64) {
    let i = m.select(rng.random());
    let omega = sample_direction(&m.components()[i].gaussian, x0, rng);
    (omega, directional_pdf_mixture(m, x0, omega))
}
