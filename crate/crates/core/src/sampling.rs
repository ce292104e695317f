//! Elementary warps, orthonormal frames and seeded RNG streams.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vec3::Vec3;

pub const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Right-handed orthonormal basis with `n` as the third axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub s: Vec3,
    pub t: Vec3,
    pub n: Vec3,
}

impl Frame {
    /// Branchless basis construction (Duff et al. 2017). `n` must be unit length.
    pub fn from_normal(n: Vec3) -> Self {
        let sign = 1.0f64.copysign(n.z);
        let a = -1.0 / (sign + n.z);
        let b = n.x * n.y * a;
        let s = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
        let t = Vec3::new(b, sign + n.y * n.y * a, -n.y);
        Self { s, t, n }
    }

    #[inline]
    pub fn to_world(&self, v: Vec3) -> Vec3 {
        self.s * v.x + self.t * v.y + self.n * v.z
    }

    #[inline]
    pub fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.s), v.dot(self.t), v.dot(self.n))
    }
}

/// Direction from a cosine value and azimuth, in a frame with pole `n`.
#[inline]
pub fn spherical_direction(frame: &Frame, cos_theta: f64, phi: f64) -> Vec3 {
    let c = cos_theta.clamp(-1.0, 1.0);
    let sin_theta = (1.0 - c * c).max(0.0).sqrt();
    frame.to_world(Vec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), c))
}

#[inline]
pub fn uniform_sphere(u1: f64, u2: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Cosine-weighted direction around +z of the local frame.
#[inline]
pub fn cosine_hemisphere(u1: f64, u2: f64) -> Vec3 {
    let (dx, dy) = concentric_disk(u1, u2);
    let z = (1.0 - dx * dx - dy * dy).max(0.0).sqrt();
    Vec3::new(dx, dy, z)
}

/// Shirley-Chiu concentric map of the unit square onto the unit disk.
#[inline]
pub fn concentric_disk(u1: f64, u2: f64) -> (f64, f64) {
    let ox = 2.0 * u1 - 1.0;
    let oy = 2.0 * u2 - 1.0;
    if ox == 0.0 && oy == 0.0 {
        return (0.0, 0.0);
    }
    let (r, theta) = if ox.abs() > oy.abs() {
        (ox, PI / 4.0 * (oy / ox))
    } else {
        (oy, PI / 2.0 - PI / 4.0 * (ox / oy))
    };
    (r * theta.cos(), r * theta.sin())
}

/// Uniform barycentrics on a triangle (returns weights for v1 and v2).
#[inline]
pub fn uniform_triangle(u1: f64, u2: f64) -> (f64, f64) {
    let su = u1.sqrt();
    (su * (1.0 - u2), su * u2)
}

/// Standard normal via Box-Muller; consumes two uniforms.
#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Deterministic RNG for a named stream: (seed, iteration, purpose, index).
///
/// Work items draw from their own stream so results do not depend on how
/// rayon schedules them.
pub fn stream_rng(seed: u64, iteration: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ 0x6a09_e667_f3bc_c909);
    h = splitmix(h ^ iteration.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    h = splitmix(h ^ purpose.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    h = splitmix(h ^ index.wrapping_mul(0x94d0_49bb_1331_11eb));
    ChaCha8Rng::seed_from_u64(h)
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        for n in [
            Vec3::Z,
            -Vec3::Z,
            Vec3::X,
            Vec3::new(0.3, -0.4, 0.5).normalize(),
            Vec3::new(0.0, 0.0, -0.9999).normalize(),
        ] {
            let f = Frame::from_normal(n);
            assert!((f.s.length() - 1.0).abs() < 1e-12);
            assert!((f.t.length() - 1.0).abs() < 1e-12);
            assert!(f.s.dot(f.t).abs() < 1e-12);
            assert!(f.s.dot(n).abs() < 1e-12);
            assert!((f.s.cross(f.t) - n).length() < 1e-12);
        }
    }

    #[test]
    fn warps_stay_in_domain() {
        let mut rng = stream_rng(1, 0, 0, 0);
        for _ in 0..1000 {
            let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
            assert!((uniform_sphere(a, b).length() - 1.0).abs() < 1e-12);
            let h = cosine_hemisphere(a, b);
            assert!(h.z >= 0.0 && (h.length() - 1.0).abs() < 1e-9);
            let (dx, dy) = concentric_disk(a, b);
            assert!(dx * dx + dy * dy <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = stream_rng(7, 1, 2, 3).random();
        let b: u64 = stream_rng(7, 1, 2, 3).random();
        let c: u64 = stream_rng(7, 1, 2, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
