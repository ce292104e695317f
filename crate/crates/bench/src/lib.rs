//! Shared inputs for the benchmarks.

use g3d_core::gmath::{Gaussian3, GaussianMixture};
use g3d_core::sampling::stream_rng;
use g3d_core::Vec3;
use rand::Rng;

/// Uniform point in the cube `[-half, half]^3`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

/// `n` points drawn with a fixed seed.
pub fn random_points(n: usize, half: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = stream_rng(seed, 0, 0, 0);
    (0..n).map(|_| random_point(&mut rng, half)).collect()
}

/// Equal-weight mixture of `n` Gaussians inside a unit-sized cube.
pub fn random_mixture(n: usize, seed: u64) -> GaussianMixture {
    let mut rng = stream_rng(seed, 0, 1, 0);
    let gs: Vec<Gaussian3> = (0..n)
        .map(|_| Gaussian3::new(random_point(&mut rng, 1.0), rng.random_range(0.05..0.5)).expect("positive sigma"))
        .collect();
    GaussianMixture::uniform(&gs).expect("nonempty")
}
