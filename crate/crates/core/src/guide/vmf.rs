//! Von Mises–Fisher lobes and a mixture fitted with the same KL/Adam loop as
//! the Gaussian guider.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::optimizer::{AdamConfig, AdamState};
use crate::sampling::Frame;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmfLobe {
    /// Unit mean direction.
    pub nu: Vec3,
    pub kappa: f64,
}

/// `kappa / (2 pi (1 - e^{-2 kappa}))`, the density at the mean direction.
fn peak(kappa: f64) -> f64 {
    kappa / (2.0 * PI * -(-2.0 * kappa).exp_m1())
}

impl VmfLobe {
    pub fn pdf(&self, omega: Vec3) -> f64 {
        let k = self.kappa;
        if k < 1e-8 {
            return crate::sampling::INV_4PI;
        }
        peak(k) * (k * (self.nu.dot(omega) - 1.0)).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let k = self.kappa;
        let w = if k < 1e-8 {
            1.0 - 2.0 * u1
        } else {
            // Inverse CDF in cos(theta), written to stay accurate for large kappa.
            (1.0 + (u1 + (1.0 - u1) * (-2.0 * k).exp()).ln() / k).clamp(-1.0, 1.0)
        };
        let s = (1.0 - w * w).max(0.0).sqrt();
        let phi = 2.0 * PI * u2;
        Frame::from_normal(self.nu).to_world(Vec3::new(s * phi.cos(), s * phi.sin(), w))
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn inv_softplus(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One directional training observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionSample {
    pub omega: Vec3,
    pub q_hat: f64,
    pub t_count: u32,
}

/// Mixture of vMF lobes with softmax weights, kept in optimizer form:
/// per lobe `[nu_x, nu_y, nu_z, kappa_raw, weight_raw]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VmfMixture {
    params: Vec<f64>,
    adam: AdamState,
}

const P: usize = 5;
const KAPPA_MAX: f64 = 1e4;

impl VmfMixture {
    pub fn new(lobes: &[(f64, VmfLobe)]) -> Self {
        let mut params = Vec::with_capacity(lobes.len() * P);
        for (w, l) in lobes {
            params.extend([
                l.nu.x,
                l.nu.y,
                l.nu.z,
                inv_softplus(l.kappa.max(1e-6)),
                w.max(1e-300).ln(),
            ]);
        }
        let adam = AdamState::new(params.len(), AdamConfig::default());
        Self { params, adam }
    }

    /// `n` lobes with concentration `kappa` spread over the sphere on a
    /// Fibonacci lattice.
    pub fn spread(n: usize, kappa: f64) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let lobes: Vec<(f64, VmfLobe)> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                (
                    1.0 / n as f64,
                    VmfLobe {
                        nu: Vec3::new(r * phi.cos(), r * phi.sin(), z),
                        kappa,
                    },
                )
            })
            .collect();
        Self::new(&lobes)
    }

    pub fn len(&self) -> usize {
        self.params.len() / P
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Weighted lobes in natural parameters.
    pub fn lobes(&self) -> Vec<(f64, VmfLobe)> {
        let raw: Vec<f64> = self.params.chunks_exact(P).map(|c| c[4]).collect();
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = raw.iter().map(|r| (r - max).exp()).collect();
        let sum: f64 = e.iter().sum();
        self.params
            .chunks_exact(P)
            .zip(e)
            .map(|(c, w)| {
                (
                    w / sum,
                    VmfLobe {
                        nu: Vec3::new(c[0], c[1], c[2]).normalize(),
                        kappa: softplus(c[3]).min(KAPPA_MAX),
                    },
                )
            })
            .collect()
    }

    pub fn pdf(&self, omega: Vec3) -> f64 {
        self.lobes().iter().map(|(w, l)| w * l.pdf(omega)).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec3, f64) {
        let lobes = self.lobes();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = lobes.len() - 1;
        for (i, (w, _)) in lobes.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        let omega = lobes[pick].1.sample(rng);
        let pdf = lobes.iter().map(|(w, l)| w * l.pdf(omega)).sum();
        (omega, pdf)
    }

    /// Gradient of `log q(omega)` with respect to the raw parameters.
    pub fn grad_log(&self, omega: Vec3) -> Vec<f64> {
        let lobes = self.lobes();
        let logs: Vec<f64> = lobes
            .iter()
            .map(|(w, l)| {
                let k = l.kappa.max(1e-8);
                w.ln() + peak(k).ln() + k * (l.nu.dot(omega) - 1.0)
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        let mut g = vec![0.0; self.params.len()];
        for (i, ((w, l), c)) in lobes.iter().zip(self.params.chunks_exact(P)).enumerate() {
            let r = (logs[i] - lse).exp();
            let raw_nu = Vec3::new(c[0], c[1], c[2]);
            let len = raw_nu.length().max(1e-300);
            let cos = l.nu.dot(omega);
            // Tangential part of omega, divided by |nu_raw|.
            let dnu = (omega - l.nu * cos) * (r * l.kappa / len);
            let k = l.kappa.max(1e-8);
            let dk = 1.0 / k - 2.0 / (2.0 * k).exp_m1() + cos - 1.0;
            let gi = &mut g[i * P..(i + 1) * P];
            gi[0] = dnu.x;
            gi[1] = dnu.y;
            gi[2] = dnu.z;
            gi[3] = if softplus(c[3]) < KAPPA_MAX {
                r * dk * sigmoid(c[3])
            } else {
                0.0
            };
            gi[4] = r - w;
        }
        g
    }

    /// One Adam step on `-(1/n) sum (t/q_hat) grad log q`, then re-normalize
    /// every mean direction.
    pub fn kl_step(&mut self, batch: &[DirectionSample], lr: f64) {
        if !batch.iter().any(|s| s.t_count > 0 && s.q_hat > 0.0) {
            self.adam.skip();
            return;
        }
        let mut grad = vec![0.0; self.params.len()];
        for s in batch {
            if s.t_count == 0 || !(s.q_hat > 0.0) {
                continue;
            }
            let w = s.t_count as f64 / s.q_hat;
            for (a, b) in grad.iter_mut().zip(self.grad_log(s.omega)) {
                *a -= w * b;
            }
        }
        if !batch.is_empty() {
            let inv = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
        }
        self.adam.step(&mut self.params, &grad, lr);
        for c in self.params.chunks_exact_mut(P) {
            let n = Vec3::new(c[0], c[1], c[2]).normalize();
            let n = if n == Vec3::ZERO { Vec3::Z } else { n };
            c[0] = n.x;
            c[1] = n.y;
            c[2] = n.z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::stratified_sphere_integral;
    use crate::sampling::{stream_rng, uniform_sphere};

    #[test]
    fn peak_value_and_uniform_limit() {
        let l = VmfLobe {
            nu: Vec3::Z,
            kappa: 4.0,
        };
        // 4 e^4 / (4 pi sinh 4)
        assert!((l.pdf(Vec3::Z) - 0.636_833_406_175_553_1).abs() < 1e-14);
        // The unnormalized printed form differs by exactly e^kappa.
        let printed = 4.0 / (4.0 * PI * 4f64.sinh());
        assert!((printed - 0.011_664_010_699_794_01).abs() < 1e-15);
        assert!((l.pdf(Vec3::Z) / printed - 4f64.exp()).abs() < 1e-10);
        let flat = VmfLobe {
            nu: Vec3::Z,
            kappa: 1e-9,
        };
        assert!((flat.pdf(-Vec3::Z) - crate::sampling::INV_4PI).abs() < 1e-12);
        let small = VmfLobe {
            nu: Vec3::Z,
            kappa: 1e-6,
        };
        assert!((small.pdf(Vec3::X) - crate::sampling::INV_4PI).abs() < 1e-7);
    }

    #[test]
    fn normalized_over_sphere() {
        for kappa in [0.1, 1.0, 10.0, 100.0] {
            let l = VmfLobe { nu: Vec3::Z, kappa };
            let total = stratified_sphere_integral(Vec3::Z, 400_000, 3, |w| l.pdf(w));
            assert!((total - 1.0).abs() < 1e-5, "kappa {kappa}: {total}");
        }
    }

    #[test]
    fn sampled_cosines_follow_the_lobe() {
        let l = VmfLobe {
            nu: Vec3::new(1.0, 1.0, 0.0).normalize(),
            kappa: 3.0,
        };
        let mut rng = stream_rng(1, 0, 0, 0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| l.sample(&mut rng).dot(l.nu)).sum::<f64>() / n as f64;
        // E[cos] = coth(kappa) - 1/kappa
        let expect = 1.0 / 3f64.tanh() - 1.0 / 3.0;
        assert!((mean - expect).abs() < 3e-3, "{mean} vs {expect}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = stream_rng(2, 0, 0, 0);
        for _ in 0..20 {
            let lobes: Vec<(f64, VmfLobe)> = (0..3)
                .map(|_| {
                    (
                        rng.random_range(0.2..1.0),
                        VmfLobe {
                            nu: uniform_sphere(rng.random(), rng.random()),
                            kappa: rng.random_range(0.3..6.0),
                        },
                    )
                })
                .collect();
            let m = VmfMixture::new(&lobes);
            let omega = uniform_sphere(rng.random(), rng.random());
            let g = m.grad_log(omega);
            for k in 0..m.params.len() {
                let h = 1e-6;
                let mut a = m.clone();
                a.params[k] += h;
                let mut b = m.clone();
                b.params[k] -= h;
                let fd = (a.pdf(omega).ln() - b.pdf(omega).ln()) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-5 * fd.abs().max(1.0), "{k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn fit_moves_toward_data() {
        let mut rng = stream_rng(3, 0, 0, 0);
        let target = VmfLobe {
            nu: Vec3::new(0.0, -1.0, 0.0),
            kappa: 20.0,
        };
        let mut m = VmfMixture::spread(8, 1.0);
        let before = m.pdf(target.nu);
        for it in 0..300 {
            let batch: Vec<DirectionSample> = (0..256)
                .map(|_| {
                    let (omega, q) = m.sample(&mut rng);
                    let t = (target.pdf(omega) / q * 0.5).round().min(50.0) as u32;
                    DirectionSample {
                        omega,
                        q_hat: q,
                        t_count: t,
                    }
                })
                .collect();
            m.kl_step(&batch, crate::optimizer::lr_schedule(it, 300));
        }
        // Adam moves raw kappa by about lr per step, so the peak is only
        // partially sharpened after 300 steps.
        let after = m.pdf(target.nu);
        assert!(after > 10.0 * before, "{before} -> {after}");
    }
}
