//! Equal-solid-angle 2D histogram over directions.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sampling::{spherical_direction, Frame};
use crate::vec3::Vec3;

pub const DEFAULT_RESOLUTION: usize = 256;

/// Cells are uniform in `cos(theta)` over `[-1, 1]` and in `phi` over
/// `[0, 2 pi)`, measured in a fixed frame, so every cell spans `4 pi / res^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub normal: Vec3,
    res: usize,
    weights: Vec<f64>,
    cdf: Vec<f64>,
}

impl Histogram2D {
    pub fn new(normal: Vec3, res: usize) -> Self {
        assert!(res > 0);
        let mut h = Self {
            normal: normal.normalize(),
            res,
            weights: vec![0.0; res * res],
            cdf: Vec::new(),
        };
        h.rebuild();
        h
    }

    pub fn resolution(&self) -> usize {
        self.res
    }

    pub fn cell_solid_angle(&self) -> f64 {
        4.0 * PI / (self.res * self.res) as f64
    }

    fn frame(&self) -> Frame {
        Frame::from_normal(self.normal)
    }

    fn cell_of(&self, omega: Vec3) -> usize {
        let l = self.frame().to_local(omega);
        let c = l.z.clamp(-1.0, 1.0);
        let mut phi = l.y.atan2(l.x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let i = (((c + 1.0) * 0.5 * self.res as f64) as usize).min(self.res - 1);
        let j = ((phi / (2.0 * PI) * self.res as f64) as usize).min(self.res - 1);
        i * self.res + j
    }

    /// Adds `weight` to the cell containing `omega`. Call [`Self::rebuild`]
    /// before sampling again.
    pub fn record(&mut self, omega: Vec3, weight: f64) {
        if weight.is_finite() && weight > 0.0 {
            let c = self.cell_of(omega);
            self.weights[c] += weight;
        }
    }

    /// Recomputes the sampling table with a prior of `1e-3` times the mean
    /// cell weight (uniform when nothing was recorded).
    pub fn rebuild(&mut self) {
        let n = self.weights.len() as f64;
        let mean = self.weights.iter().sum::<f64>() / n;
        let prior = if mean > 0.0 { 1e-3 * mean } else { 1.0 };
        let mut acc = 0.0;
        self.cdf = self
            .weights
            .iter()
            .map(|w| {
                acc += w + prior;
                acc
            })
            .collect();
    }

    fn cell_probability(&self, c: usize) -> f64 {
        let total = *self.cdf.last().expect("table built");
        let lo = if c == 0 { 0.0 } else { self.cdf[c - 1] };
        (self.cdf[c] - lo) / total
    }

    pub fn pdf(&self, omega: Vec3) -> f64 {
        self.cell_probability(self.cell_of(omega)) / self.cell_solid_angle()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec3, f64) {
        let total = *self.cdf.last().expect("table built");
        let t = rng.random::<f64>() * total;
        let c = self.cdf.partition_point(|&v| v <= t).min(self.cdf.len() - 1);
        let (i, j) = (c / self.res, c % self.res);
        let cos = -1.0 + 2.0 * (i as f64 + rng.random::<f64>()) / self.res as f64;
        let phi = 2.0 * PI * (j as f64 + rng.random::<f64>()) / self.res as f64;
        let omega = spherical_direction(&self.frame(), cos, phi);
        (omega, self.pdf(omega))
    }
}
