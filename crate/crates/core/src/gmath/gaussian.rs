use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::standard_normal;
use crate::vec3::Vec3;

/// Isotropic 3D Gaussian `exp(-|x - mu|^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian3 {
    pub mu: Vec3,
    pub sigma: f64,
}

impl Gaussian3 {
    pub fn new(mu: Vec3, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidSigma(sigma));
        }
        if !mu.is_finite() {
            return Err(Error::NonFiniteMean);
        }
        Ok(Self { mu, sigma })
    }

    /// Unnormalized value in (0, 1].
    #[inline]
    pub fn eval(&self, x: Vec3) -> f64 {
        (-x.distance_squared(self.mu) / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Integral of [`Gaussian3::eval`] over R^3.
    #[inline]
    pub fn normalizer(&self) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(1.5)
    }

    #[inline]
    pub fn density(&self, x: Vec3) -> f64 {
        self.eval(x) / self.normalizer()
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let n = Vec3::new(
            standard_normal(rng),
            standard_normal(rng),
            standard_normal(rng),
        );
        self.mu + n * self.sigma
    }
}

#[inline]
pub fn eval_gaussian(g: &Gaussian3, x: Vec3) -> f64 {
    g.eval(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub gaussian: Gaussian3,
}

/// Convex combination of isotropic Gaussians; a probability density on R^3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    components: Vec<MixtureComponent>,
}

const WEIGHT_TOLERANCE: f64 = 1e-9;

impl GaussianMixture {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMixture);
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| !(c.weight >= 0.0)) || (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::BadWeights(sum));
        }
        Ok(Self { components })
    }

    /// Builds a mixture after rescaling the weights to sum to one.
    pub fn from_unnormalized(components: Vec<MixtureComponent>) -> Result<Self> {
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::BadWeights(sum));
        }
        Self::new(
            components
                .into_iter()
                .map(|c| MixtureComponent {
                    weight: c.weight / sum,
                    gaussian: c.gaussian,
                })
                .collect(),
        )
    }

    /// Equal-weight mixture of the given Gaussians.
    pub fn uniform(gaussians: &[Gaussian3]) -> Result<Self> {
        let w = 1.0 / gaussians.len() as f64;
        Self::from_unnormalized(
            gaussians
                .iter()
                .map(|&gaussian| MixtureComponent { weight: w, gaussian })
                .collect(),
        )
    }

    pub fn single(g: Gaussian3) -> Self {
        Self {
            components: vec![MixtureComponent {
                weight: 1.0,
                gaussian: g,
            }],
        }
    }

    #[inline]
    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Probability density (length^-3).
    pub fn density(&self, x: Vec3) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.gaussian.density(x))
            .sum()
    }

    /// Index of the component selected by `u` in [0, 1) proportionally to weight.
    pub fn select(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        // Rounding slack: last component with positive weight.
        self.components
            .iter()
            .rposition(|c| c.weight > 0.0)
            .unwrap_or(self.components.len() - 1)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let i = self.select(rng.random());
        self.components[i].gaussian.sample_point(rng)
    }
}

#[inline]
pub fn mixture_density(m: &GaussianMixture, x: Vec3) -> f64 {
    m.density(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;

    fn g(mu: Vec3, sigma: f64) -> Gaussian3 {
        Gaussian3::new(mu, sigma).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_gaussian(&g(Vec3::ZERO, 1.0), Vec3::ZERO), 1.0);
        let v = eval_gaussian(&g(Vec3::ZERO, 1.0), Vec3::X);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.606_531).abs() < 1e-6);
        // exp(-1 / (2 * 0.25)) = exp(-2), evaluated at 50 digits: 0.1353352832366126918939994949724844034076315459095758814681588726
        let v = eval_gaussian(&g(Vec3::new(1.0, 2.0, 3.0), 0.5), Vec3::new(1.0, 2.0, 4.0));
        assert!((v - 0.135_335_283_236_612_69).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Gaussian3::new(Vec3::ZERO, 0.0).is_err());
        assert!(Gaussian3::new(Vec3::ZERO, f64::NAN).is_err());
        assert!(Gaussian3::new(Vec3::new(f64::INFINITY, 0.0, 0.0), 1.0).is_err());
        assert!(GaussianMixture::new(vec![]).is_err());
        let c = MixtureComponent {
            weight: 0.4,
            gaussian: g(Vec3::ZERO, 1.0),
        };
        assert!(matches!(
            GaussianMixture::new(vec![c, c]),
            Err(Error::BadWeights(_))
        ));
    }

    #[test]
    fn density_normalization_constant() {
        let m = GaussianMixture::single(g(Vec3::ZERO, 1.0));
        let v = mixture_density(&m, Vec3::ZERO);
        assert!((v - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        assert!((v - 0.063_493_6).abs() < 1e-7);
    }

    #[test]
    fn duplicate_components_match_single() {
        let base = g(Vec3::new(0.3, -1.0, 2.0), 0.7);
        let single = GaussianMixture::single(base);
        let double = GaussianMixture::uniform(&[base, base]).unwrap();
        for x in [Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), base.mu] {
            assert!((single.density(x) - double.density(x)).abs() < 1e-16);
        }
    }

    #[test]
    fn density_matches_direct_sum() {
        let mut rng = stream_rng(11, 0, 0, 0);
        for _ in 0..20 {
            let comps: Vec<MixtureComponent> = (0..3)
                .map(|_| MixtureComponent {
                    weight: rng.random::<f64>() + 0.1,
                    gaussian: g(
                        Vec3::new(rng.random(), rng.random(), rng.random()) * 4.0,
                        0.2 + rng.random::<f64>(),
                    ),
                })
                .collect();
            let m = GaussianMixture::from_unnormalized(comps.clone()).unwrap();
            let total: f64 = comps.iter().map(|c| c.weight).sum();
            let x = Vec3::new(rng.random(), rng.random(), rng.random()) * 4.0;
            let oracle: f64 = comps
                .iter()
                .map(|c| {
                    let s2 = c.gaussian.sigma * c.gaussian.sigma;
                    c.weight / total * (-(x - c.gaussian.mu).length_squared() / (2.0 * s2)).exp()
                        / (2.0 * PI * s2).powf(1.5)
                })
                .sum();
            assert!(((m.density(x) - oracle) / oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn mixture_integrates_to_one() {
        // Stratified Monte Carlo over a box holding all but ~1e-9 of the mass.
        let m = GaussianMixture::from_unnormalized(vec![
            MixtureComponent {
                weight: 0.3,
                gaussian: g(Vec3::new(-1.0, 0.0, 0.5), 0.4),
            },
            MixtureComponent {
                weight: 0.7,
                gaussian: g(Vec3::new(1.0, 0.5, 0.0), 0.6),
            },
        ])
        .unwrap();
        let lo = Vec3::new(-4.0, -3.5, -3.5);
        let hi = Vec3::new(4.5, 4.0, 4.0);
        let n = 60usize;
        let cell = Vec3::new(
            (hi.x - lo.x) / n as f64,
            (hi.y - lo.y) / n as f64,
            (hi.z - lo.z) / n as f64,
        );
        let mut rng = stream_rng(3, 0, 0, 0);
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = Vec3::new(
                        lo.x + (i as f64 + rng.random::<f64>()) * cell.x,
                        lo.y + (j as f64 + rng.random::<f64>()) * cell.y,
                        lo.z + (k as f64 + rng.random::<f64>()) * cell.z,
                    );
                    sum += m.density(p);
                }
            }
        }
        let integral = sum * cell.x * cell.y * cell.z;
        assert!((integral - 1.0).abs() < 2e-3, "integral {integral}");
    }

    #[test]
    fn sample_point_moments() {
        let gauss = g(Vec3::new(1.0, 2.0, 3.0), 2.0);
        let mut rng = stream_rng(5, 0, 0, 0);
        let n = 1_000_000;
        let mut mean = Vec3::ZERO;
        let mut sq = Vec3::ZERO;
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            let p = gauss.sample_point(&mut rng);
            mean += p;
            sq += p.mul_elem(p);
            xs.push(p.x);
        }
        mean = mean / n as f64;
        let var = sq / n as f64 - mean.mul_elem(mean);
        for a in 0..3 {
            assert!((mean[a] - gauss.mu[a]).abs() < 0.01);
            assert!((var[a] - 4.0).abs() < 0.08);
        }
        // Kolmogorov-Smirnov on the x marginal; critical value at alpha = 0.01.
        xs.sort_by(f64::total_cmp);
        let normal = statrs::distribution::Normal::new(1.0, 2.0).unwrap();
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            use statrs::distribution::ContinuousCDF;
            let c = normal.cdf(x);
            d = d
                .max((c - i as f64 / n as f64).abs())
                .max(((i + 1) as f64 / n as f64 - c).abs());
        }
        assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn degenerate_width_returns_mean() {
        let gauss = g(Vec3::new(1.0, -2.0, 0.5), 1e-12);
        let mut rng = stream_rng(5, 1, 0, 0);
        for _ in 0..10 {
            assert!(gauss.sample_point(&mut rng).distance(gauss.mu) < 1e-6);
        }
    }
}
