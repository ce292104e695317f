//! Replica-exchange Metropolis emission in primary sample space with a binary
//! target.
//!
//! Every step first tries an independent uniform state. If the target accepts
//! it, the chain jumps there. Otherwise the last accepted state is mutated
//! per coordinate with a small wrapped Gaussian. If that fails as well, the
//! last accepted sample is recorded again.
//!
//! Recorded samples are distributed in proportion to the target, so their
//! uniform-emission weights must be scaled by the target's volume `b`. It is
//! estimated from the uniform proposals (the running `b_hat`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sampling::standard_normal;

pub const PSS_DIM: usize = 8;
pub type PssState = [f64; PSS_DIM];
pub const MUTATION_SIGMA: f64 = 0.001;
/// Bootstrap proposals per chain.
pub const BOOTSTRAP_FACTOR: usize = 64;

pub fn uniform_state<R: Rng + ?Sized>(rng: &mut R) -> PssState {
    std::array::from_fn(|_| rng.random())
}

pub fn mutate<R: Rng + ?Sized>(v: &PssState, sigma: f64, rng: &mut R) -> PssState {
    std::array::from_fn(|i| {
        let x = v[i] + sigma * standard_normal(rng);
        let w = x - x.floor();
        // Guard the open upper end against rounding to 1.0.
        if w >= 1.0 {
            0.0
        } else {
            w
        }
    })
}

/// Running fraction of uniform proposals that the target accepted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub accepted: u64,
    pub proposed: u64,
}

impl VisibilityEstimate {
    pub fn b_hat(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn merge(&mut self, o: &VisibilityEstimate) {
        self.accepted += o.accepted;
        self.proposed += o.proposed;
    }
}

/// What a chain step records.
#[derive(Clone, Debug, PartialEq)]
pub struct Recorded<T> {
    pub state: PssState,
    pub value: T,
    /// Whether the recorded sample satisfies the target. Only false while a
    /// chain is still unseeded.
    pub visible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McmcChain<T> {
    current: Option<(PssState, T)>,
    pub sigma: f64,
}

impl<T: Clone> Default for McmcChain<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Clone> McmcChain<T> {
    pub fn new() -> Self {
        Self {
            current: None,
            sigma: MUTATION_SIGMA,
        }
    }

    pub fn seeded(state: PssState, value: T) -> Self {
        Self {
            current: Some((state, value)),
            sigma: MUTATION_SIGMA,
        }
    }

    pub fn is_seeded(&self) -> bool {
        self.current.is_some()
    }

    pub fn current(&self) -> Option<&(PssState, T)> {
        self.current.as_ref()
    }

    pub fn step<R, F>(&mut self, target: &F, est: &mut VisibilityEstimate, rng: &mut R) -> Recorded<T>
    where
        R: Rng + ?Sized,
        F: Fn(&PssState) -> (bool, T),
    {
        let v1 = uniform_state(rng);
        let (ok1, out1) = target(&v1);
        est.proposed += 1;
        if ok1 {
            est.accepted += 1;
            self.current = Some((v1, out1.clone()));
            return Recorded {
                state: v1,
                value: out1,
                visible: true,
            };
        }
        let Some((cur, cur_out)) = &self.current else {
            return Recorded {
                state: v1,
                value: out1,
                visible: false,
            };
        };
        let v2 = mutate(cur, self.sigma, rng);
        let (ok2, out2) = target(&v2);
        if ok2 {
            self.current = Some((v2, out2.clone()));
            return Recorded {
                state: v2,
                value: out2,
                visible: true,
            };
        }
        Recorded {
            state: *cur,
            value: cur_out.clone(),
            visible: true,
        }
    }
}

/// Evaluates `m` uniform states, keeps those the target accepts, and seeds
/// every chain from a random pool member. Chains stay unseeded when the pool
/// is empty. The proposals count toward `est`.
pub fn bootstrap<T, R, F>(
    chains: &mut [McmcChain<T>],
    m: usize,
    target: &F,
    est: &mut VisibilityEstimate,
    rng: &mut R,
) -> usize
where
    T: Clone,
    R: Rng + ?Sized,
    F: Fn(&PssState) -> (bool, T),
{
    let mut pool = Vec::new();
    for _ in 0..m {
        let v = uniform_state(rng);
        let (ok, out) = target(&v);
        est.proposed += 1;
        if ok {
            est.accepted += 1;
            pool.push((v, out));
        }
    }
    if !pool.is_empty() {
        for c in chains.iter_mut() {
            let (v, out) = pool[rng.random_range(0..pool.len())].clone();
            c.current = Some((v, out));
        }
    }
    pool.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;

    #[test]
    fn always_visible_is_uniform_sampling() {
        let mut rng = stream_rng(1, 0, 0, 0);
        let mut chain = McmcChain::<()>::new();
        let mut est = VisibilityEstimate::default();
        let target = |_: &PssState| (true, ());
        let mut bins = [0u64; 10];
        for _ in 0..100_000 {
            let r = chain.step(&target, &mut est, &mut rng);
            bins[(r.state[3] * 10.0) as usize] += 1;
        }
        assert_eq!(est.b_hat(), 1.0);
        let (_, p, _) = crate::diagnostics::chi_square(&bins, &[0.1; 10]);
        assert!(p > 0.01);
    }

    #[test]
    fn stays_in_tiny_region() {
        let mut rng = stream_rng(2, 0, 0, 0);
        let inside = |v: &PssState| (v[0] - 0.5).abs() < 0.01 && (v[1] - 0.5).abs() < 0.01;
        let target = |v: &PssState| (inside(v), ());
        let mut seed = [0.5; PSS_DIM];
        seed[2] = 0.1;
        let mut chain = McmcChain::seeded(seed, ());
        let mut est = VisibilityEstimate::default();
        for _ in 0..20_000 {
            let r = chain.step(&target, &mut est, &mut rng);
            assert!(r.visible && inside(&r.state));
        }
    }

    #[test]
    fn bootstrap_pool_and_empty_fallback() {
        let mut rng = stream_rng(3, 0, 0, 0);
        let mut chains = vec![McmcChain::<f64>::new(); 4];
        let mut est = VisibilityEstimate::default();
        let target = |v: &PssState| (v[0] < 0.25, v[0]);
        let n = bootstrap(&mut chains, 256, &target, &mut est, &mut rng);
        assert!(n > 0);
        assert!(chains.iter().all(|c| c.current().unwrap().1 < 0.25));
        let mut empty = vec![McmcChain::<f64>::new(); 2];
        let never = |v: &PssState| (false, v[0]);
        assert_eq!(bootstrap(&mut empty, 64, &never, &mut est, &mut rng), 0);
        assert!(empty.iter().all(|c| !c.is_seeded()));
        let r = empty[0].step(&never, &mut est, &mut rng);
        assert!(!r.visible);
    }

    #[test]
    fn recorded_distribution_matches_target_volume() {
        // Target on the first coordinate: [0.2, 0.5) and [0.7, 0.8).
        let support = |x: f64| (0.2..0.5).contains(&x) || (0.7..0.8).contains(&x);
        let target = |v: &PssState| (support(v[0]), ());
        let mut rng = stream_rng(4, 0, 0, 0);
        let mut chains = vec![McmcChain::<()>::new(); 8];
        let mut est = VisibilityEstimate::default();
        bootstrap(&mut chains, 8 * BOOTSTRAP_FACTOR, &target, &mut est, &mut rng);
        let bins = 20;
        let mut hist = vec![0u64; bins];
        let steps = 25_000;
        for c in chains.iter_mut() {
            for _ in 0..steps {
                let r = c.step(&target, &mut est, &mut rng);
                hist[(r.state[0] * bins as f64) as usize] += 1;
            }
        }
        let total: u64 = hist.iter().sum();
        let tv: f64 = (0..bins)
            .map(|b| {
                let x = (b as f64 + 0.5) / bins as f64;
                let expect = if support(x) { 1.0 / (0.4 * bins as f64) } else { 0.0 };
                (hist[b] as f64 / total as f64 - expect).abs()
            })
            .sum::<f64>()
            * 0.5;
        assert!(tv <= 0.05, "tv {tv}");
        assert!((est.b_hat() - 0.4).abs() < 0.01);
    }
}
