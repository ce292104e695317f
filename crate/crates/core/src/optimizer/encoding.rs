use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmath::{Gaussian3, GaussianMixture, MixtureComponent};
use crate::vec3::Vec3;

/// Numerator of the position scale `B = C_B / scene_diameter`.
pub const C_B: f64 = 20.0;
/// Upper bound on sigma in scaled space.
pub const C_S: f64 = 0.65;
/// Optimizer parameters per component: scaled mean (3), p_sigma, raw weight.
pub const PARAMS_PER_COMPONENT: usize = 5;

/// Position scale for a scene whose bounding sphere has diameter `diameter`.
pub fn scale_factor(diameter: f64) -> Result<f64> {
    if !(diameter > 0.0) || !diameter.is_finite() {
        return Err(Error::NonPositiveDiameter(diameter));
    }
    Ok(C_B / diameter)
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedComponent {
    /// World-space mean multiplied by the scene scale.
    pub scaled_mu: Vec3,
    /// Pre-sigmoid width; scaled sigma is `C_S * sigmoid(p_sigma)`.
    pub p_sigma: f64,
    /// Pre-softmax weight.
    pub raw_weight: f64,
}

/// Optimizer-facing parameterization of a [`GaussianMixture`].
///
/// All optimization happens in scaled space (positions times `scale`), where
/// sigma is capped at [`C_S`]. Decoding divides both mean and sigma by the
/// scale to return a world-space mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedMixture {
    pub components: Vec<EncodedComponent>,
    pub scale: f64,
}

impl EncodedMixture {
    /// Encodes a world-space mixture. Sigmas outside the representable range
    /// are clamped just inside `(0, C_S)` in scaled space.
    pub fn encode(m: &GaussianMixture, scale: f64) -> Self {
        let components = m
            .components()
            .iter()
            .map(|c| {
                let s = (c.gaussian.sigma * scale).clamp(C_S * 1e-9, C_S * (1.0 - 1e-9));
                EncodedComponent {
                    scaled_mu: c.gaussian.mu * scale,
                    p_sigma: (s / (C_S - s)).ln(),
                    raw_weight: if c.weight > 0.0 { c.weight.ln() } else { -60.0 },
                }
            })
            .collect();
        Self { components, scale }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    #[inline]
    pub fn scaled_sigma(&self, i: usize) -> f64 {
        C_S * sigmoid(self.components[i].p_sigma)
    }

    /// Softmax of the raw weights.
    pub fn weights(&self) -> Vec<f64> {
        let max = self
            .components
            .iter()
            .map(|c| c.raw_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = self
            .components
            .iter()
            .map(|c| (c.raw_weight - max).exp())
            .collect();
        let sum: f64 = e.iter().sum();
        e.into_iter().map(|v| v / sum).collect()
    }

    pub fn decode(&self) -> GaussianMixture {
        let weights = self.weights();
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| MixtureComponent {
                weight: weights[i],
                gaussian: Gaussian3 {
                    mu: c.scaled_mu / self.scale,
                    sigma: (self.scaled_sigma(i) / self.scale).max(f64::MIN_POSITIVE),
                },
            })
            .collect();
        GaussianMixture::from_unnormalized(comps).expect("softmax weights are a simplex point")
    }

    /// Scaled-space mixture (positions and sigma multiplied by `scale`).
    pub fn scaled_mixture(&self) -> GaussianMixture {
        let weights = self.weights();
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| MixtureComponent {
                weight: weights[i],
                gaussian: Gaussian3 {
                    mu: c.scaled_mu,
                    sigma: self.scaled_sigma(i).max(f64::MIN_POSITIVE),
                },
            })
            .collect();
        GaussianMixture::from_unnormalized(comps).expect("softmax weights are a simplex point")
    }

    pub fn num_params(&self) -> usize {
        self.components.len() * PARAMS_PER_COMPONENT
    }

    /// Flat parameter vector, `[mx, my, mz, p_sigma, raw_weight]` per component.
    pub fn params(&self) -> Vec<f64> {
        self.components
            .iter()
            .flat_map(|c| {
                [
                    c.scaled_mu.x,
                    c.scaled_mu.y,
                    c.scaled_mu.z,
                    c.p_sigma,
                    c.raw_weight,
                ]
            })
            .collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.num_params());
        for (c, chunk) in self
            .components
            .iter_mut()
            .zip(p.chunks_exact(PARAMS_PER_COMPONENT))
        {
            c.scaled_mu = Vec3::new(chunk[0], chunk[1], chunk[2]);
            c.p_sigma = chunk[3];
            c.raw_weight = chunk[4];
        }
    }
}
