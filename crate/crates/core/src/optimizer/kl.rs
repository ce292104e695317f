use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::encoding::{sigmoid, EncodedMixture, C_S, PARAMS_PER_COMPONENT};
use crate::vec3::Vec3;

/// One emitted photon's contribution to the fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    /// First-bounce position (world space).
    pub x: Vec3,
    /// Emission pdf at generation time (light pmf included).
    pub q_hat: f64,
    /// Number of times photons from this emission were gathered this pass.
    pub t_count: u32,
}

/// Log density of the scaled-space mixture at `x_scaled` and its gradient
/// with respect to the flat parameter vector of `enc`.
pub fn grad_log_mixture(enc: &EncodedMixture, x_scaled: Vec3) -> (f64, Vec<f64>) {
    let n = enc.len();
    let weights = enc.weights();
    let mut log_terms = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    for (i, c) in enc.components.iter().enumerate() {
        let s = enc.scaled_sigma(i);
        let r2 = x_scaled.distance_squared(c.scaled_mu);
        let log_n = -1.5 * (2.0 * PI * s * s).ln() - r2 / (2.0 * s * s);
        log_terms.push(weights[i].ln() + log_n);
        sigmas.push((s, r2));
    }
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|&l| (l - max).exp()).sum();
    let log_q = max + sum.ln();

    let mut grad = vec![0.0; n * PARAMS_PER_COMPONENT];
    for (i, c) in enc.components.iter().enumerate() {
        let resp = (log_terms[i] - log_q).exp();
        let (s, r2) = sigmas[i];
        let g = &mut grad[i * PARAMS_PER_COMPONENT..(i + 1) * PARAMS_PER_COMPONENT];
        let dm = (x_scaled - c.scaled_mu) * (resp / (s * s));
        g[0] = dm.x;
        g[1] = dm.y;
        g[2] = dm.z;
        // d log N / d s, chained through s = C_S * sigmoid(p).
        let dlog_ds = resp * (-3.0 / s + r2 / (s * s * s));
        let ds_dp = C_S * sigmoid(c.p_sigma) * (1.0 - sigmoid(c.p_sigma));
        g[3] = dlog_ds * ds_dp;
        g[4] = resp - weights[i];
    }
    (log_q, grad)
}

/// Monte Carlo estimate of the KL gradient over one batch:
/// `-(1/|batch|) * sum (t / q_hat) * grad log q(x * B)`.
pub fn kl_gradient(enc: &EncodedMixture, batch: &[TrainingSample]) -> Vec<f64> {
    let mut total = vec![0.0; enc.num_params()];
    if batch.is_empty() {
        return total;
    }
    for s in batch {
        if s.t_count == 0 || !(s.q_hat > 0.0) {
            continue;
        }
        let (_, g) = grad_log_mixture(enc, s.x * enc.scale);
        let w = s.t_count as f64 / s.q_hat;
        for (t, gi) in total.iter_mut().zip(&g) {
            *t -= w * gi;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    total.iter_mut().for_each(|t| *t *= inv);
    total
}

/// Applies one Adam step of the one-sample KL gradient. Samples with a zero
/// gather count contribute nothing; the unknown target normalization is left
/// to Adam's moment scaling. A batch without any gathered sample leaves the
/// parameters unchanged and only advances the step count.
pub fn kl_step(enc: &mut EncodedMixture, adam: &mut AdamState, batch: &[TrainingSample], lr: f64) {
    if !batch.iter().any(|s| s.t_count > 0 && s.q_hat > 0.0) {
        adam.skip();
        return;
    }
    let grad = kl_gradient(enc, batch);
    let mut params = enc.params();
    adam.step(&mut params, &grad, lr);
    enc.set_params(&params);
}

/// Geometric decay from 0.1 at the first iteration to 0.01 at the last.
pub fn lr_schedule(iteration: usize, total: usize) -> f64 {
    const START: f64 = 0.1;
    const END: f64 = 0.01;
    if total <= 1 {
        return START;
    }
    let t = (iteration.min(total - 1)) as f64 / (total - 1) as f64;
    START * (END / START).powf(t)
}
