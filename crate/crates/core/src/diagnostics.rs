//! Numerical oracles: adaptive quadrature, stratified sphere integration and
//! goodness-of-fit statistics. Used by the test suites and the `test-dist`
//! command; nothing here is on the rendering path.

use std::f64::consts::PI;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::sampling::{stream_rng, Frame};
use crate::vec3::Vec3;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GK_GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_KRONROD_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GK_GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive 15-point Gauss-Kronrod quadrature with a relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let (total, _) = gauss_kronrod(&f, a, b);
    let mut stack = vec![(a, b, 0u32)];
    let mut sum = 0.0;
    let scale = total.abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gauss_kronrod(&f, lo, hi);
        let mid = 0.5 * (lo + hi);
        if err <= rel_tol * scale.max(v.abs()) || depth >= 48 || mid <= lo || mid >= hi {
            sum += v;
        } else {
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    sum
}

/// The ray integral `int_0^inf exp(-((r - d c)^2 + d^2 (1 - c^2)) / 2s^2) r^2 dr`
/// evaluated numerically. Independent of the closed form in `gmath`.
pub fn radial_directional_integral(d: f64, sigma: f64, cos_theta: f64) -> f64 {
    let c = cos_theta.clamp(-1.0, 1.0);
    let peak = (d * c).max(0.0);
    let offset = d * d * (1.0 - c * c) / (2.0 * sigma * sigma);
    let f = |r: f64| {
        let s = r - d * c;
        (-(s * s) / (2.0 * sigma * sigma) - offset).exp() * r * r
    };
    // Integrand is negligible (relative 1e-300) past peak + 40 sigma.
    let end = peak + 40.0 * sigma;
    let mut total = 0.0;
    let mut breaks = vec![0.0];
    if peak > 0.0 {
        breaks.push(peak);
    }
    let mut x = peak;
    for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let b = peak + k * sigma;
        if b > x {
            breaks.push(b);
            x = b;
        }
    }
    breaks.push(end);
    for w in breaks.windows(2) {
        total += integrate(f, w[0], w[1], 1e-12);
    }
    total
}

/// Directional pdf by quadrature, normalized by the Gaussian's volume integral.
pub fn directional_pdf_by_quadrature(d: f64, sigma: f64, cos_theta: f64) -> f64 {
    radial_directional_integral(d, sigma, cos_theta) / (2.0 * PI * sigma * sigma).powf(1.5)
}

/// Stratified Monte Carlo over the sphere for integrands that concentrate
/// around `pole`. The unit interval is split into `n` strata in
/// `u`, `cos(theta) = 1 - 2 u^2`, each receiving one jittered sample with
/// a random azimuth.
pub fn stratified_sphere_integral<F: Fn(Vec3) -> f64>(pole: Vec3, n: usize, seed: u64, f: F) -> f64 {
    let frame = Frame::from_normal(pole.normalize());
    let mut rng = stream_rng(seed, 0, 0x5a5a, 0);
    let mut sum = 0.0;
    for i in 0..n {
        let u = (i as f64 + rng.random::<f64>()) / n as f64;
        let phi = 2.0 * PI * rng.random::<f64>();
        let c = 1.0 - 2.0 * u * u;
        let s = (1.0 - c * c).max(0.0).sqrt();
        let w = frame.to_world(Vec3::new(s * phi.cos(), s * phi.sin(), c));
        // d omega = 2 pi * 4 u du
        sum += f(w) * 8.0 * PI * u;
    }
    sum / n as f64
}

/// Jittered (cos theta, phi) grid quadrature over the sphere for general
/// integrands.
pub fn stratified_sphere_grid<F: Fn(Vec3) -> f64>(
    n_cos: usize,
    n_phi: usize,
    seed: u64,
    f: F,
) -> f64 {
    let mut rng = stream_rng(seed, 0, 0xa5a5, 0);
    let mut sum = 0.0;
    for i in 0..n_cos {
        for j in 0..n_phi {
            let c = -1.0 + 2.0 * (i as f64 + rng.random::<f64>()) / n_cos as f64;
            let phi = 2.0 * PI * (j as f64 + rng.random::<f64>()) / n_phi as f64;
            let s = (1.0 - c * c).max(0.0).sqrt();
            sum += f(Vec3::new(s * phi.cos(), s * phi.sin(), c));
        }
    }
    sum * 4.0 * PI / (n_cos * n_phi) as f64
}

/// Pearson chi-square goodness of fit. Adjacent bins are pooled until each
/// expected count reaches 5. Returns (statistic, p-value, degrees of freedom).
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> (f64, f64, usize) {
    assert_eq!(observed.len(), probabilities.len());
    let total: u64 = observed.iter().sum();
    let p_sum: f64 = probabilities.iter().sum();
    let mut pooled = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probabilities) {
        o_acc += o as f64;
        e_acc += p / p_sum * total as f64;
        if e_acc >= 5.0 {
            pooled.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => pooled.push((o_acc, e_acc)),
        }
    }
    let stat: f64 = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len().saturating_sub(1).max(1);
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    (stat, p, dof)
}

/// Probability mass of each of `bins` equal-width cos(theta) bins under the
/// directional density with parameters (d, sigma), by quadrature.
pub fn cos_theta_bin_probabilities(d: f64, sigma: f64, bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|i| {
            let a = -1.0 + 2.0 * i as f64 / bins as f64;
            let b = -1.0 + 2.0 * (i + 1) as f64 / bins as f64;
            2.0 * PI * integrate(|c| directional_pdf_by_quadrature(d, sigma, c), a, b, 1e-9)
        })
        .collect()
}
