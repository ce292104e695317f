//! Caster bounding boxes read as a spatial distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmath::PlaneFrame;
use crate::scene::{Aabb, Ray};
use crate::vec3::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundGuide {
    pub boxes: Vec<Aabb>,
    pub weights: Vec<f64>,
}

/// Smoothing between the previous weights and the new count-based estimate.
pub const BOUND_SMOOTHING: f64 = 0.5;

impl BoundGuide {
    /// Equal weights over `boxes`; every box must have positive volume.
    pub fn new(boxes: Vec<Aabb>) -> Result<Self> {
        if boxes.is_empty() || boxes.iter().any(|b| !(b.volume() > 0.0)) {
            return Err(Error::DegenerateBox);
        }
        let w = 1.0 / boxes.len() as f64;
        Ok(Self {
            weights: vec![w; boxes.len()],
            boxes,
        })
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    fn uniform_in<R: Rng + ?Sized>(b: &Aabb, rng: &mut R) -> Vec3 {
        let e = b.extent();
        b.min + Vec3::new(rng.random::<f64>() * e.x, rng.random::<f64>() * e.y, rng.random::<f64>() * e.z)
    }

    /// Solid-angle density of the direction toward a uniform point in one box:
    /// `(r_exit^3 - r_entry^3) / (3 V)` over the ray's interval inside it.
    pub fn box_pdf(b: &Aabb, x0: Vec3, omega: Vec3) -> f64 {
        match b.intersect(&Ray::new(x0, omega), 0.0, f64::INFINITY) {
            Some((t0, t1)) if t1 > t0 => (t1.powi(3) - t0.powi(3)) / (3.0 * b.volume()),
            _ => 0.0,
        }
    }

    pub fn pdf(&self, x0: Vec3, omega: Vec3) -> f64 {
        self.boxes
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| w * Self::box_pdf(b, x0, omega))
            .sum()
    }

    /// Direction from `x0` to a uniform point of a weight-selected box. `None`
    /// when the point coincides with `x0`.
    pub fn sample<R: Rng + ?Sized>(&self, x0: Vec3, rng: &mut R) -> Option<(Vec3, f64)> {
        let b = &self.boxes[self.pick(rng)];
        let omega = (Self::uniform_in(b, rng) - x0).normalize();
        (omega != Vec3::ZERO).then(|| (omega, self.pdf(x0, omega)))
    }

    /// Area density on `plane` of the orthogonal projection of a uniform box
    /// point: chord length through the box along the plane normal over `V`.
    pub fn plane_pdf(&self, plane: &PlaneFrame, p: [f64; 2]) -> f64 {
        let origin = plane.to_world(p);
        let n = plane.normal();
        self.boxes
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| {
                match b.intersect(&Ray::new(origin, n), f64::NEG_INFINITY, f64::INFINITY) {
                    Some((t0, t1)) if t1 > t0 => w * (t1 - t0) / b.volume(),
                    _ => 0.0,
                }
            })
            .sum()
    }

    pub fn sample_plane<R: Rng + ?Sized>(&self, plane: &PlaneFrame, rng: &mut R) -> ([f64; 2], f64) {
        let b = &self.boxes[self.pick(rng)];
        let p = plane.to_plane(Self::uniform_in(b, rng));
        (p, self.plane_pdf(plane, p))
    }

    /// Index of the box containing `p`, or else the one with the nearest center.
    pub fn box_of(&self, p: Vec3) -> usize {
        if let Some(i) = self.boxes.iter().position(|b| b.contains(p)) {
            return i;
        }
        (0..self.boxes.len())
            .min_by(|&a, &b| {
                self.boxes[a]
                    .center()
                    .distance_squared(p)
                    .total_cmp(&self.boxes[b].center().distance_squared(p))
            })
            .expect("nonempty")
    }

    /// `w <- s w + (1 - s) (c + 1) / sum(c + 1)` with `s = 0.5`.
    pub fn update_weights(&mut self, counts: &[f64]) {
        assert_eq!(counts.len(), self.weights.len());
        let total: f64 = counts.iter().map(|c| c + 1.0).sum();
        for (w, c) in self.weights.iter_mut().zip(counts) {
            *w = BOUND_SMOOTHING * *w + (1.0 - BOUND_SMOOTHING) * (c + 1.0) / total;
        }
        let s: f64 = self.weights.iter().sum();
        self.weights.iter_mut().for_each(|w| *w /= s);
    }
}
