use std::f64::consts::PI;

use rand::Rng;

use super::gaussian::GaussianMixture;
use crate::sampling::{standard_normal, Frame};
use crate::vec3::Vec3;

/// Plane with an in-plane orthonormal coordinate system.
#[derive(Clone, Copy, Debug)]
pub struct PlaneFrame {
    pub origin: Vec3,
    pub frame: Frame,
}

impl PlaneFrame {
    pub fn new(origin: Vec3, normal: Vec3) -> Self {
        Self {
            origin,
            frame: Frame::from_normal(normal),
        }
    }

    #[inline]
    pub fn normal(&self) -> Vec3 {
        self.frame.n
    }

    /// In-plane coordinates of the orthogonal projection of `p`.
    #[inline]
    pub fn to_plane(&self, p: Vec3) -> [f64; 2] {
        let v = p - self.origin;
        [v.dot(self.frame.s), v.dot(self.frame.t)]
    }

    #[inline]
    pub fn to_world(&self, p: [f64; 2]) -> Vec3 {
        self.origin + self.frame.s * p[0] + self.frame.t * p[1]
    }
}

/// Isotropic 2D Gaussian in plane coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian2 {
    pub mu: [f64; 2],
    pub sigma: f64,
}

impl Gaussian2 {
    #[inline]
    pub fn density(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.mu[0];
        let dy = p[1] - self.mu[1];
        let s2 = self.sigma * self.sigma;
        (-(dx * dx + dy * dy) / (2.0 * s2)).exp() / (2.0 * PI * s2)
    }
}

/// Orthogonal projection of a 3D mixture onto a plane.
#[derive(Clone, Debug)]
pub struct ProjectedMixture {
    pub plane: PlaneFrame,
    pub components: Vec<(f64, Gaussian2)>,
}

/// Marginalizes every component along the plane normal. Isotropic components
/// stay isotropic with unchanged sigma.
pub fn project_mixture_to_plane(
    m: &GaussianMixture,
    plane_origin: Vec3,
    plane_normal: Vec3,
) -> ProjectedMixture {
    let plane = PlaneFrame::new(plane_origin, plane_normal);
    let components = m
        .components()
        .iter()
        .map(|c| {
            (
                c.weight,
                Gaussian2 {
                    mu: plane.to_plane(c.gaussian.mu),
                    sigma: c.gaussian.sigma,
                },
            )
        })
        .collect();
    ProjectedMixture { plane, components }
}

impl ProjectedMixture {
    /// Density per unit plane area.
    pub fn pdf(&self, p: [f64; 2]) -> f64 {
        self.components
            .iter()
            .map(|(w, g)| w * g.density(p))
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ([f64; 2], f64) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components.len() - 1;
        for (i, (w, _)) in self.components.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        let g = self.components[pick].1;
        let p = [
            g.mu[0] + g.sigma * standard_normal(rng),
            g.mu[1] + g.sigma * standard_normal(rng),
        ];
        (p, self.pdf(p))
    }
}

#[inline]
pub fn sample_plane_point<R: Rng + ?Sized>(pm: &ProjectedMixture, rng: &mut R) -> ([f64; 2], f64) {
    pm.sample(rng)
}
