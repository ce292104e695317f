//! Mixture initialization from caster geometry and first-pass photon votes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmath::{Gaussian3, GaussianMixture};
use crate::optimizer::C_S;
use crate::sampling::standard_normal;
use crate::scene::Scene;
use crate::vec3::Vec3;

/// Default number of k-means clusters per caster surface.
pub const DEFAULT_K_PER_GEOMETRY: usize = 16;
/// Default surface samples drawn per caster for clustering.
pub const DEFAULT_SURFACE_SAMPLES: usize = 4096;
const KMEANS_ITERS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSampleSet {
    pub points: Vec<Vec3>,
    /// Area represented by each point.
    pub weights: Vec<f64>,
    /// Surface index each point came from.
    pub surfaces: Vec<usize>,
}

/// Area-weighted points over the union of `casters`.
pub fn sample_geometry<R: Rng + ?Sized>(
    scene: &Scene,
    casters: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<SurfaceSampleSet> {
    if casters.is_empty() {
        return Err(Error::NoCasters);
    }
    let mut cdf = Vec::with_capacity(casters.len());
    let mut total = 0.0;
    for &c in casters {
        total += scene.surfaces[c].area();
        cdf.push(total);
    }
    let mut set = SurfaceSampleSet {
        points: Vec::with_capacity(n),
        weights: vec![total / n.max(1) as f64; n],
        surfaces: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let t = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= t).min(casters.len() - 1);
        let (p, _) = scene.surfaces[casters[k]].sample_point(rng.random(), rng.random(), rng.random());
        set.points.push(p);
        set.surfaces.push(casters[k]);
    }
    Ok(set)
}

fn nearest(centroids: &[Vec3], p: Vec3) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = c.distance_squared(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding. Returns the centroids and the
/// final assignment of every point.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec3],
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> Result<(Vec<Vec3>, Vec<usize>)> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let mut centroids = vec![points[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = points.iter().map(|p| p.distance_squared(centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let t = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > t {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All points coincide with chosen centroids; take unchosen indices.
            centroids.len()
        };
        let c = points[next];
        centroids.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.distance_squared(c));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(points) {
            let (i, _) = nearest(&centroids, *p);
            if *a != i {
                *a = i;
                changed = true;
            }
        }
        let mut sums = vec![Vec3::ZERO; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assign.iter().zip(points) {
            sums[a] += *p;
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] == 0 {
                // Reseed at the point farthest from its centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = points[a].distance_squared(centroids[assign[a]]);
                        let db = points[b].distance_squared(centroids[assign[b]]);
                        da.total_cmp(&db)
                    })
                    .expect("points are nonempty");
                centroids[j] = points[far];
                assign[far] = j;
                changed = true;
            } else {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        if !changed {
            break;
        }
    }
    Ok((centroids, assign))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedGaussianSet {
    pub gaussians: Vec<Gaussian3>,
    pub counters: Vec<u64>,
}

impl SeedGaussianSet {
    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn clear_counters(&mut self) {
        self.counters.iter_mut().for_each(|c| *c = 0);
    }
}

/// Clusters every caster separately; each cluster becomes a Gaussian whose
/// sigma is the RMS distance of its points, floored at `1e-4` of the scene
/// diameter.
pub fn build_seed_set<R: Rng + ?Sized>(
    scene: &Scene,
    k_per_geometry: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<SeedGaussianSet> {
    let casters = scene.caster_indices();
    if casters.is_empty() {
        return Err(Error::NoCasters);
    }
    let floor = 1e-4 * scene.bounds.diameter();
    let mut gaussians = Vec::new();
    for &c in &casters {
        let samples = sample_geometry(scene, &[c], n_samples, rng)?;
        let k = k_per_geometry.min(samples.points.len());
        let (centroids, assign) = kmeans(&samples.points, k, KMEANS_ITERS, rng)?;
        let mut sq = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assign.iter().zip(&samples.points) {
            sq[a] += p.distance_squared(centroids[a]);
            counts[a] += 1;
        }
        for j in 0..k {
            let rms = (sq[j] / counts[j].max(1) as f64).sqrt();
            gaussians.push(Gaussian3::new(centroids[j], rms.max(floor))?);
        }
    }
    let counters = vec![0; gaussians.len()];
    Ok(SeedGaussianSet {
        gaussians,
        counters,
    })
}

/// Votes each point to its nearest seed mean, then returns up to `g` seeds
/// with the highest nonzero counts (ties to the lower index).
pub fn assign_and_rank(seed: &mut SeedGaussianSet, points: &[Vec3], g: usize) -> Vec<Gaussian3> {
    if seed.is_empty() {
        return Vec::new();
    }
    let means: Vec<Vec3> = seed.gaussians.iter().map(|g| g.mu).collect();
    for p in points {
        seed.counters[nearest(&means, *p).0] += 1;
    }
    rank(seed, g)
}

fn rank(seed: &SeedGaussianSet, g: usize) -> Vec<Gaussian3> {
    let mut order: Vec<usize> = (0..seed.len()).filter(|&i| seed.counters[i] > 0).collect();
    order.sort_by(|&a, &b| seed.counters[b].cmp(&seed.counters[a]).then(a.cmp(&b)));
    order.truncate(g);
    order.into_iter().map(|i| seed.gaussians[i]).collect()
}

/// Extends `ranked` to exactly `g` components by cycling through it with
/// means jittered by half a sigma, so the optimizer gets distinct components.
pub fn pad_components<R: Rng + ?Sized>(ranked: &[Gaussian3], g: usize, rng: &mut R) -> Vec<Gaussian3> {
    let mut out: Vec<Gaussian3> = ranked.iter().take(g).copied().collect();
    let mut i = 0;
    while out.len() < g && !ranked.is_empty() {
        let base = ranked[i % ranked.len()];
        let jitter = Vec3::new(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        out.push(Gaussian3 {
            mu: base.mu + jitter * (0.5 * base.sigma),
            sigma: base.sigma,
        });
        i += 1;
    }
    out
}

/// Per-light mixtures from the first uniform pass.
///
/// `votes[l]` holds the first-bounce points of light `l`'s gathered photons.
/// Lights without votes use the ranking pooled over all lights; if nobody
/// gathered anything, `g` seeds are drawn uniformly from the seed set.
pub fn init_light_mixtures<R: Rng + ?Sized>(
    seed: &SeedGaussianSet,
    votes: &[Vec<Vec3>],
    g: usize,
    rng: &mut R,
) -> Result<Vec<GaussianMixture>> {
    if seed.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let mut pooled = seed.clone();
    pooled.clear_counters();
    let mut per_light = Vec::with_capacity(votes.len());
    for v in votes {
        let mut s = seed.clone();
        s.clear_counters();
        per_light.push(assign_and_rank(&mut s, v, g));
        for (a, b) in pooled.counters.iter_mut().zip(&s.counters) {
            *a += b;
        }
    }
    let global = rank(&pooled, g);
    let fallback: Vec<Gaussian3> = if global.is_empty() {
        (0..g).map(|_| seed.gaussians[rng.random_range(0..seed.len())]).collect()
    } else {
        global
    };
    per_light
        .into_iter()
        .map(|ranked| {
            let base = if ranked.is_empty() { &fallback } else { &ranked };
            GaussianMixture::uniform(&pad_components(base, g, rng))
        })
        .collect()
}

/// Baseline initializer: k-means on first-hit positions with every sigma at
/// the middle of the encoded range, `C_S / 2` in scaled space.
pub fn naive_light_mixture<R: Rng + ?Sized>(
    first_hits: &[Vec3],
    g: usize,
    scale: f64,
    fallback_center: Vec3,
    rng: &mut R,
) -> Result<GaussianMixture> {
    let sigma = C_S * 0.5 / scale;
    if first_hits.is_empty() {
        return Ok(GaussianMixture::single(Gaussian3::new(fallback_center, sigma)?));
    }
    let k = g.min(first_hits.len());
    let (centroids, _) = kmeans(first_hits, k, KMEANS_ITERS, rng)?;
    let gs = centroids
        .into_iter()
        .map(|c| Gaussian3::new(c, sigma))
        .collect::<Result<Vec<_>>>()?;
    GaussianMixture::uniform(&pad_components(&gs, g, rng))
}
