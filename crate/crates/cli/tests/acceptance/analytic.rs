//! Criteria that exercise the math directly, without rendering.

use std::f64::consts::PI;
use std::time::Instant;

use g3d_core::diagnostics::{
    chi_square, cos_theta_bin_probabilities, directional_pdf_by_quadrature,
    stratified_sphere_integral,
};
use g3d_core::gmath::{directional_pdf, sample_direction, Gaussian3, GaussianMixture};
use g3d_core::guide::{BoundGuide, Histogram2D, VmfLobe, VmfMixture};
use g3d_core::light_tree::{LightTree, LightTreeConfig};
use g3d_core::optimizer::{
    grad_log_mixture, kl_step, lr_schedule, AdamConfig, AdamState, EncodedComponent,
    EncodedMixture, TrainingSample,
};
use g3d_core::sampling::{stream_rng, INV_4PI};
use g3d_core::scene::Aabb;
use g3d_core::Vec3;
use rand::Rng;

use crate::Outcome;

const D_OVER_SIGMA: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0];
const COS_THETA: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 0.9, 1.0];

pub fn c1_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &r in &D_OVER_SIGMA {
        for &c in &COS_THETA {
            let a = directional_pdf(r, 1.0, c);
            let q = directional_pdf_by_quadrature(r, 1.0, c);
            let rel = if a == q { 0.0 } else { (a - q).abs() / a.abs().max(q.abs()) };
            worst = worst.max(rel);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-6 && secs < 1.0,
        format!("max relative error {worst:.2e} over 36 points in {secs:.3}s"),
    )
}

pub fn c2_normalization() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &r in &D_OVER_SIGMA {
        let i = stratified_sphere_integral(Vec3::Z, 20_000, 1, |w| directional_pdf(r, 1.0, w.z));
        worst = worst.max((i - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-4 && secs < 1.0,
        format!("max |integral - 1| = {worst:.2e} in {secs:.3}s"),
    )
}

pub fn c3_sampling() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for r in [0.0, 1.0, 5.0] {
        let g = Gaussian3::new(Vec3::new(0.0, 0.0, r), 1.0).unwrap();
        let mut rng = stream_rng(3, 0, 0, r.to_bits());
        let mut counts = vec![0u64; 64];
        for _ in 0..1_000_000 {
            let c = sample_direction(&g, Vec3::ZERO, &mut rng).z;
            counts[(((c + 1.0) * 32.0) as usize).min(63)] += 1;
        }
        let (_, p, _) = chi_square(&counts, &cos_theta_bin_probabilities(r, 1.0, 64));
        ok &= p > 0.01;
        parts.push(format!("p(d/s={r}) = {p:.3}"));
    }
    // Exact up to floating-point rounding of the closed form.
    let exact = COS_THETA
        .iter()
        .all(|&c| (directional_pdf(0.0, 1.7, c) - INV_4PI).abs() <= 1e-14 * INV_4PI);
    let secs = start.elapsed().as_secs_f64();
    ok &= exact && secs < 10.0;
    Outcome::new(ok, format!("{}, d=0 equals 1/(4 pi): {exact}, {secs:.1}s", parts.join(", ")))
}

fn random_encoded<R: Rng>(rng: &mut R, n: usize) -> EncodedMixture {
    EncodedMixture {
        components: (0..n)
            .map(|_| EncodedComponent {
                scaled_mu: Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0,
                p_sigma: rng.random_range(-1.5..1.5),
                raw_weight: rng.random_range(-1.0..1.0),
            })
            .collect(),
        scale: 1.0,
    }
}

pub fn c4_gradients() -> Outcome {
    const H: f64 = 1e-5;
    // Gradients below this magnitude are compared absolutely.
    const FLOOR: f64 = 1e-3;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = stream_rng(4, 0, 0, seed);
        let n = rng.random_range(1..=8);
        let enc = random_encoded(&mut rng, n);
        let x = Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0;
        let (_, grad) = grad_log_mixture(&enc, x);
        let p = enc.params();
        for (i, &g) in grad.iter().enumerate() {
            let at = |delta: f64| {
                let mut e = enc.clone();
                let mut q = p.clone();
                q[i] += delta;
                e.set_params(&q);
                grad_log_mixture(&e, x).0
            };
            let fd = (at(H) - at(-H)) / (2.0 * H);
            worst = worst.max((g - fd).abs() / g.abs().max(fd.abs()).max(FLOOR));
        }
    }
    Outcome::new(worst <= 1e-5, format!("max relative error {worst:.2e} over 100 mixtures"))
}

/// One seeded recovery run; returns (max mean error in sigmas, max weight error).
fn recover(seed: u64) -> (f64, f64) {
    let targets = [
        (0.3, Gaussian3::new(Vec3::new(-3.0, 0.5, 1.0), 0.3).unwrap()),
        (0.7, Gaussian3::new(Vec3::new(2.5, -1.0, -0.5), 0.5).unwrap()),
    ];
    let target_pdf = |x: Vec3| targets.iter().map(|(w, g)| w * g.density(x)).sum::<f64>();
    let peak = targets.iter().map(|(w, g)| w * g.normalizer()).fold(0.0, f64::max);
    let broad = Gaussian3::new(Vec3::ZERO, 4.0).unwrap();
    let scale = 1.0;
    let mut rng = stream_rng(5, seed, 0, 0);
    let init: Vec<Gaussian3> = targets
        .iter()
        .map(|(_, g)| {
            let dir = g3d_core::sampling::uniform_sphere(rng.random(), rng.random());
            Gaussian3::new(g.mu + dir * 1.0, 0.45).unwrap()
        })
        .collect();
    let mut enc = EncodedMixture::encode(&GaussianMixture::uniform(&init).unwrap(), scale);
    let mut adam = AdamState::new(enc.num_params(), AdamConfig::default());
    const STEPS: usize = 512;
    const BETA: f64 = 0.8;
    // Photons recorded per step, and the gather count at the target's peak.
    const BATCH: usize = 4096;
    const PEAK_COUNT: f64 = 64.0;
    for step in 0..STEPS {
        let q = enc.decode();
        let batch: Vec<TrainingSample> = (0..BATCH)
            .map(|_| {
                // Guided with a broad fallback, as in rendering with a blend weight.
                let x = if rng.random::<f64>() < BETA { q.sample_point(&mut rng) } else { broad.sample_point(&mut rng) };
                let q_hat = BETA * q.density(x) + (1.0 - BETA) * broad.density(x);
                // Integer gather counts proportional to the target, rounded stochastically.
                let t = PEAK_COUNT * target_pdf(x) / peak + rng.random::<f64>();
                TrainingSample { x, q_hat, t_count: t as u32 }
            })
            .collect();
        kl_step(&mut enc, &mut adam, &batch, lr_schedule(step, STEPS));
    }
    let fit = enc.decode();
    let c = fit.components();
    let score = |perm: [usize; 2]| {
        let mut mean_err: f64 = 0.0;
        let mut weight_err: f64 = 0.0;
        for (k, (w, g)) in targets.iter().enumerate() {
            let f = &c[perm[k]];
            mean_err = mean_err.max(f.gaussian.mu.distance(g.mu) / g.sigma);
            weight_err = weight_err.max((f.weight - w).abs());
        }
        (mean_err, weight_err)
    };
    let (a, b) = (score([0, 1]), score([1, 0]));
    if a.0 <= b.0 {
        a
    } else {
        b
    }
}

pub fn c5_fit_recovery() -> Outcome {
    let start = Instant::now();
    let runs: Vec<(f64, f64)> = (0..10).map(recover).collect();
    let ok = runs.iter().filter(|(m, w)| *m <= 0.1 && *w <= 0.05).count();
    let secs = start.elapsed().as_secs_f64();
    let worst_mean = runs.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_weight = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    Outcome::new(
        ok >= 9 && secs < 30.0,
        format!(
            "{ok}/10 seeds recovered; worst mean error {worst_mean:.3} sigma, worst weight error {worst_weight:.3}, {secs:.1}s"
        ),
    )
}

pub fn c6_light_tree() -> Outcome {
    const LIGHTS: usize = 16;
    const PER_ITERATION: usize = 20_000;
    let mut rng = stream_rng(6, 0, 0, 0);
    // Skewed gather distribution with a few nearly dark lights.
    let raw: Vec<f64> = (0..LIGHTS).map(|i| if i % 5 == 3 { 0.002 } else { rng.random::<f64>().powi(2) + 0.01 }).collect();
    let total: f64 = raw.iter().sum();
    let target: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let mut cdf = Vec::with_capacity(LIGHTS);
    let mut acc = 0.0;
    for p in &target {
        acc += p;
        cdf.push(acc);
    }
    let mut tree = LightTree::new(LIGHTS, LightTreeConfig::default()).unwrap();
    let mut seen = vec![0u64; LIGHTS];
    for _ in 0..64 {
        tree.begin_iteration();
        let mut counts = vec![0u64; LIGHTS];
        for _ in 0..PER_ITERATION {
            let u: f64 = rng.random();
            counts[cdf.partition_point(|&c| c <= u).min(LIGHTS - 1)] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            tree.record(i, c).unwrap();
            seen[i] += c;
        }
        tree.refine();
    }
    let n: u64 = seen.iter().sum();
    let l1: f64 = (0..LIGHTS)
        .map(|i| (tree.pmf(i).unwrap() - seen[i] as f64 / n as f64).abs())
        .sum();
    Outcome::new(l1 <= 0.05, format!("L1 distance {l1:.4} after 64 refinements, {} leaves", tree.leaves().len()))
}

/// Monte Carlo estimate of the integral of 1/pdf over the guide's own samples.
fn self_integral(n: usize, mut draw: impl FnMut() -> (Vec3, f64)) -> f64 {
    (0..n).map(|_| 1.0 / draw().1).sum::<f64>() / n as f64
}

pub fn c11_baselines() -> Outcome {
    const N: usize = 1_000_000;
    let four_pi = 4.0 * PI;
    let mut rng = stream_rng(11, 0, 0, 0);

    let vmf = VmfMixture::new(&[
        (0.5, VmfLobe { nu: Vec3::new(0.0, 0.0, 1.0), kappa: 5.0 }),
        (0.3, VmfLobe { nu: Vec3::new(1.0, 1.0, 0.0).normalize(), kappa: 2.0 }),
        (0.2, VmfLobe { nu: Vec3::new(0.0, -1.0, 0.2).normalize(), kappa: 0.5 }),
    ]);
    let v = self_integral(N, || vmf.sample(&mut rng));

    let mut hist = Histogram2D::new(Vec3::Y, 256);
    for _ in 0..20_000 {
        let (w, _) = vmf.sample(&mut rng);
        hist.record(w, 1.0);
    }
    hist.rebuild();
    let h = self_integral(N, || hist.sample(&mut rng));

    let bound = BoundGuide::new(vec![
        Aabb::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 0.5, 2.0)),
        Aabb::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 1.0, 1.0)),
    ])
    .unwrap();
    // Inside the first box every direction has positive density.
    let x0 = Vec3::new(0.2, -0.3, 0.4);
    let b = self_integral(N, || bound.sample(x0, &mut rng).expect("boxes are nondegenerate"));

    let rel = |x: f64| (x - four_pi).abs() / four_pi;
    let worst = rel(v).max(rel(h)).max(rel(b));
    Outcome::new(
        worst <= 0.01,
        format!(
            "relative errors vmf {:.2e}, histogram {:.2e}, bound {:.2e}",
            rel(v),
            rel(h),
            rel(b)
        ),
    )
}
