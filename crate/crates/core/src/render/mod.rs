//! Progressive photon mapping with guided emission.
//!
//! Each iteration emits photons, keeps the caustic ones in a kd-tree, gathers
//! them from the camera's first diffuse hits, and finally trains the emission
//! guides on how often each photon was gathered. Iteration 0 always emits
//! uniformly; its image is discarded and its photons initialize the guides.

pub mod camera_pass;
pub mod emission;
pub mod framebuffer;
pub mod kdtree;
pub mod photon_map;
pub mod trace;

use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use camera_pass::{direct_light, trace_eye, VisiblePoint};
pub use emission::{effective_beta, emission_pdf, emit, emit_pss, light_plane, EmissionSample};
pub use framebuffer::{Framebuffer, Image, PixelSample};
pub use kdtree::{KdTree, Neighbor};
pub use photon_map::{Gather, Photon, PhotonMap, GATHER_K};
pub use trace::{fresnel_dielectric, specular_scatter, trace_photon, Deposit, PhotonPath};

use crate::error::{Error, Result};
use crate::gmath::{Gaussian3, GaussianMixture};
use crate::guide::mcmc::{bootstrap, Recorded, BOOTSTRAP_FACTOR};
use crate::guide::{
    BoundGuide, EmissionRecord, GaussianGuide, GuiderKind, Histogram2D, LightGuide, McmcChain,
    PssState, VisibilityEstimate, VmfMixture,
};
use crate::initializer::{
    build_seed_set, init_light_mixtures, naive_light_mixture, pad_components, DEFAULT_K_PER_GEOMETRY,
    DEFAULT_SURFACE_SAMPLES,
};
use crate::light_tree::{LightTree, LightTreeConfig};
use crate::optimizer::{scale_factor, C_S};
use crate::sampling::stream_rng;
use crate::scene::{Aabb, Light, Scene};
use crate::vec3::{Rgb, Vec3};

/// How the Gaussian guides are seeded after the first pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Caster-surface clusters voted on by gathered photons.
    #[default]
    Geometry,
    /// k-means on first-hit points with a fixed mid-range sigma.
    Naive,
    /// One broad Gaussian at the scene center.
    Off,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LightSamplerMode {
    #[default]
    Adaptive,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub guider: GuiderKind,
    /// Total iterations including the discarded first one.
    pub iterations: usize,
    pub photons_per_iteration: usize,
    /// Probability of drawing from the guide instead of uniform emission.
    pub beta: f64,
    /// The bounding-box guide's own blend weight. Boxes contain every caster,
    /// so sampling them exclusively still reaches every caustic path.
    pub bound_beta: f64,
    pub components: usize,
    pub seed: u64,
    pub init: InitMode,
    pub light_sampler: LightSamplerMode,
    pub light_tree: LightTreeConfig,
    pub max_depth: usize,
    /// Gather radius cap as a fraction of the scene's bounding diameter.
    pub radius_factor: f64,
    pub histogram_resolution: usize,
    pub mcmc_chains: usize,
    /// Jitter eye rays inside each pixel. When off, every iteration shades
    /// the pixel center, so image noise comes from the photons alone.
    pub pixel_jitter: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            guider: GuiderKind::G3d,
            iterations: 64,
            photons_per_iteration: 1 << 16,
            beta: 0.8,
            bound_beta: 1.0,
            components: 32,
            seed: 0,
            init: InitMode::Geometry,
            light_sampler: LightSamplerMode::Adaptive,
            light_tree: LightTreeConfig::default(),
            max_depth: 8,
            radius_factor: 0.05,
            histogram_resolution: crate::guide::histogram::DEFAULT_RESOLUTION,
            mcmc_chains: 64,
            pixel_jitter: true,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if self.photons_per_iteration < 1 {
            return bad("photons_per_iteration must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.beta) || !(0.0..=1.0).contains(&self.bound_beta) {
            return bad("beta must lie in [0, 1]");
        }
        if self.components < 1 {
            return bad("components must be at least 1");
        }
        if self.max_depth < 2 {
            return bad("max_depth must be at least 2");
        }
        if !(self.radius_factor > 0.0) {
            return bad("radius_factor must be positive");
        }
        if self.histogram_resolution < 1 || self.mcmc_chains < 1 {
            return bad("histogram_resolution and mcmc_chains must be positive");
        }
        Ok(())
    }

    /// Blend weight used by guided iterations.
    pub fn guided_beta(&self) -> f64 {
        match self.guider {
            GuiderKind::Bound => self.bound_beta,
            GuiderKind::Uniform | GuiderKind::Mcmc => 0.0,
            _ => self.beta,
        }
    }
}

/// What one iteration produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    /// Denominator of the density estimate (recorded samples for MCMC).
    pub emitted: usize,
    pub deposited: usize,
    /// Distinct photons used by at least one gather.
    pub gathered: usize,
    /// Sum of per-photon gather counts, per light.
    pub gather_counts: Vec<u64>,
    /// Deposited caustic power per light (luminance), an estimate of the
    /// power each light sends through casters onto receivers.
    pub deposited_power: Vec<f64>,
    pub seconds: f64,
}

// Independent random streams.
const STREAM_PHOTON: u64 = 1;
const STREAM_CAMERA: u64 = 2;
const STREAM_INIT: u64 = 3;
const STREAM_MCMC: u64 = 4;
const STREAM_BOOTSTRAP: u64 = 5;

/// What an MCMC chain remembers about its current sample.
#[derive(Clone, Debug, PartialEq)]
struct McmcValue {
    light: usize,
    x0: Vec3,
    /// Uniform-emission power, before the visibility scaling.
    power: Rgb,
    pdf: f64,
    path: PhotonPath,
}

struct McmcState {
    chains: Vec<McmcChain<McmcValue>>,
    estimate: VisibilityEstimate,
}

pub struct Renderer {
    scene: Scene,
    config: RenderConfig,
    guides: Vec<LightGuide>,
    light_tree: LightTree,
    framebuffer: Framebuffer,
    iteration: usize,
    max_radius: f64,
    /// Receiver points seen by the previous camera pass.
    visible: Option<KdTree>,
    mcmc: Option<McmcState>,
}

impl Renderer {
    pub fn new(scene: Scene, config: RenderConfig) -> Result<Self> {
        config.validate()?;
        let n = scene.lights.len();
        let light_tree = LightTree::new(n, config.light_tree)?;
        let framebuffer = Framebuffer::new(scene.camera.width, scene.camera.height);
        let max_radius = config.radius_factor * scene.bounds.diameter();
        Ok(Self {
            guides: vec![LightGuide::Uniform; n],
            light_tree,
            framebuffer,
            iteration: 0,
            max_radius,
            visible: None,
            mcmc: None,
            scene,
            config,
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> &RenderConfig {
        &self.config
    }

    pub fn guides(&self) -> &[LightGuide] {
        &self.guides
    }

    pub fn light_tree(&self) -> &LightTree {
        &self.light_tree
    }

    pub fn framebuffer(&self) -> &Framebuffer {
        &self.framebuffer
    }

    /// Iterations completed so far.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.config.iterations
    }

    /// Runs all remaining iterations, calling `on_iteration` after each.
    pub fn run<F: FnMut(&IterationStats, &Framebuffer)>(&mut self, mut on_iteration: F) -> Vec<IterationStats> {
        let mut all = Vec::new();
        while !self.is_done() {
            let s = self.step();
            on_iteration(&s, &self.framebuffer);
            all.push(s);
        }
        all
    }

    fn select_light(&self, u: f64) -> (usize, f64) {
        let n = self.scene.lights.len();
        if self.config.light_sampler == LightSamplerMode::Uniform || self.config.guider == GuiderKind::Mcmc {
            let i = ((u * n as f64) as usize).min(n - 1);
            (i, 1.0 / n as f64)
        } else {
            self.light_tree.sample(u)
        }
    }

    /// One full iteration: photon pass, camera pass, accumulation, training.
    pub fn step(&mut self) -> IterationStats {
        let start = Instant::now();
        let it = self.iteration;
        let nl = self.scene.lights.len();

        let (photons, records, emitted) = if self.config.guider == GuiderKind::Mcmc && it > 0 {
            let (p, e) = self.mcmc_pass();
            (p, Vec::new(), e)
        } else {
            let beta = if it == 0 { 0.0 } else { self.config.guided_beta() };
            self.photon_pass(beta)
        };

        let mut deposited_power = vec![0.0; nl];
        for p in &photons {
            deposited_power[p.light as usize] += p.flux.luminance() / emitted.max(1) as f64;
        }
        let map = PhotonMap::build(photons);
        let counts: Vec<AtomicU32> = (0..map.len()).map(|_| AtomicU32::new(0)).collect();
        let (samples, visible) = self.camera_pass(&map, emitted as f64, &counts);
        let counts: Vec<u32> = counts.into_iter().map(|c| c.into_inner()).collect();

        let mut gather_counts = vec![0u64; nl];
        for (p, &c) in map.photons().iter().zip(&counts) {
            gather_counts[p.light as usize] += c as u64;
        }
        let gathered = counts.iter().filter(|&&c| c > 0).count();

        if it > 0 {
            self.framebuffer.accumulate(&samples);
        }

        let mut records = records;
        for (p, &c) in map.photons().iter().zip(&counts) {
            if let Some(r) = records.get_mut(p.emission as usize) {
                r.t_count = c;
            }
        }
        // The first pass only seeds the guides; training starts with the
        // first guided pass.
        if it == 0 {
            self.build_guides(&records);
        } else {
            self.train(&records);
        }
        self.light_tree.begin_iteration();
        for (l, &c) in gather_counts.iter().enumerate() {
            self.light_tree.record(l, c).expect("light index in range");
        }
        self.light_tree.refine();
        self.visible = Some(KdTree::build(&visible));
        self.iteration += 1;

        IterationStats {
            iteration: it,
            emitted,
            deposited: map.len(),
            gathered,
            gather_counts,
            deposited_power,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn photon_pass(&self, beta: f64) -> (Vec<Photon>, Vec<EmissionRecord>, usize) {
        let n = self.config.photons_per_iteration;
        let it = self.iteration as u64;
        let out: Vec<(EmissionRecord, Option<Photon>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(self.config.seed, it, STREAM_PHOTON, i as u64);
                let (l, pmf) = self.select_light(rng.random());
                let light = &self.scene.lights[l];
                let e = emit(light, &self.guides[l], beta, &self.scene.bounds, &mut rng);
                let mut record = EmissionRecord {
                    light: l,
                    x0: e.x0,
                    omega: e.omega,
                    first_bounce: None,
                    q_hat: pmf * e.pdf,
                    t_count: 0,
                };
                if !(e.pdf > 0.0) || e.flux.is_black() {
                    return (record, None);
                }
                let path = trace_photon(&self.scene, e.x0, e.omega, self.config.max_depth, || rng.random());
                record.first_bounce = path.first_bounce;
                let photon = path.deposit.map(|d| Photon {
                    position: d.position,
                    incident: d.incident,
                    flux: e.flux * d.throughput * (1.0 / record.q_hat),
                    light: l as u32,
                    emission: i as u32,
                    first_bounce: path.first_bounce.expect("deposits follow a first hit"),
                    emission_pdf: record.q_hat,
                });
                (record, photon)
            })
            .collect();
        let (records, photons): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        (photons.into_iter().flatten().collect(), records, n)
    }

    fn mcmc_eval(&self, v: &PssState) -> McmcValue {
        let n = self.scene.lights.len();
        let l = ((v[0] * n as f64) as usize).min(n - 1);
        let e = emit_pss(&self.scene.lights[l], &self.scene.bounds, v);
        // Lobe choices come from the last three coordinates, recycled with a
        // golden-ratio shift if the path needs more.
        let mut k = 0usize;
        let path = if e.pdf > 0.0 && !e.flux.is_black() {
            trace_photon(&self.scene, e.x0, e.omega, self.config.max_depth, || {
                let u = (v[5 + k % 3] + 0.618_033_988_749_895 * (k / 3) as f64).fract();
                k += 1;
                u
            })
        } else {
            PhotonPath::default()
        };
        McmcValue {
            light: l,
            x0: e.x0,
            power: if e.pdf > 0.0 { e.flux * (n as f64 / e.pdf) } else { Rgb::BLACK },
            pdf: e.pdf / n as f64,
            path,
        }
    }

    fn mcmc_visible(&self, value: &McmcValue) -> bool {
        match (&value.path.deposit, &self.visible) {
            (Some(d), Some(vis)) => vis.any_within(d.position, self.max_radius),
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    /// Replica-exchange pass. Recorded samples follow the visible subset of
    /// primary sample space, so their uniform weights are scaled by the
    /// running visible fraction.
    fn mcmc_pass(&mut self) -> (Vec<Photon>, usize) {
        let it = self.iteration as u64;
        let chains_n = self.config.mcmc_chains;
        let mut state = match self.mcmc.take() {
            Some(s) => s,
            None => {
                let mut chains = vec![McmcChain::new(); chains_n];
                let mut estimate = VisibilityEstimate::default();
                let mut rng = stream_rng(self.config.seed, it, STREAM_BOOTSTRAP, 0);
                let target = |v: &PssState| {
                    let value = self.mcmc_eval(v);
                    (self.mcmc_visible(&value), value)
                };
                bootstrap(&mut chains, BOOTSTRAP_FACTOR * chains_n, &target, &mut estimate, &mut rng);
                McmcState { chains, estimate }
            }
        };
        let steps = self.config.photons_per_iteration.div_ceil(chains_n);
        let results: Vec<(McmcChain<McmcValue>, Vec<Recorded<McmcValue>>, VisibilityEstimate)> = state
            .chains
            .into_par_iter()
            .enumerate()
            .map(|(c, mut chain)| {
                let mut rng = stream_rng(self.config.seed, it, STREAM_MCMC, c as u64);
                let mut est = VisibilityEstimate::default();
                let target = |v: &PssState| {
                    let value = self.mcmc_eval(v);
                    (self.mcmc_visible(&value), value)
                };
                let recs = (0..steps).map(|_| chain.step(&target, &mut est, &mut rng)).collect();
                (chain, recs, est)
            })
            .collect();
        let mut chains = Vec::with_capacity(chains_n);
        let mut recorded = Vec::new();
        for (chain, recs, est) in results {
            state.estimate.merge(&est);
            chains.push(chain);
            recorded.extend(recs);
        }
        state.chains = chains;
        let b_hat = state.estimate.b_hat();
        self.mcmc = Some(state);
        let photons = recorded
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                let v = &r.value;
                v.path.deposit.map(|d| Photon {
                    position: d.position,
                    incident: d.incident,
                    flux: v.power * d.throughput * b_hat,
                    light: v.light as u32,
                    emission: i as u32,
                    first_bounce: v.path.first_bounce.unwrap_or(v.x0),
                    emission_pdf: v.pdf,
                })
            })
            .collect();
        (photons, recorded.len())
    }

    fn camera_pass(&self, map: &PhotonMap, emitted: f64, counts: &[AtomicU32]) -> (Vec<PixelSample>, Vec<Vec3>) {
        let cam = &self.scene.camera;
        let (w, h) = (cam.width, cam.height);
        let it = self.iteration as u64;
        let out: Vec<(PixelSample, Option<Vec3>)> = (0..w * h)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(self.config.seed, it, STREAM_CAMERA, i as u64);
                let (x, y) = (i % w, i / w);
                let (jx, jy) = if self.config.pixel_jitter {
                    (rng.random::<f64>(), rng.random::<f64>())
                } else {
                    (0.5, 0.5)
                };
                let ray = cam.ray(x as f64 + jx, y as f64 + jy);
                let Some(vp) = trace_eye(&self.scene, ray, self.config.max_depth, &mut rng) else {
                    return (PixelSample::default(), None);
                };
                let direct = direct_light(&self.scene, &vp, &mut rng);
                if !vp.receiver {
                    return (
                        PixelSample {
                            direct,
                            ..PixelSample::default()
                        },
                        None,
                    );
                }
                let g = map.gather(vp.p, vp.n, self.max_radius, vp.albedo, emitted);
                for &id in &g.ids {
                    counts[id as usize].fetch_add(1, Ordering::Relaxed);
                }
                (
                    PixelSample {
                        caustic: g.radiance * vp.throughput,
                        direct,
                        radius: Some(g.radius),
                    },
                    Some(vp.p),
                )
            })
            .collect();
        let (samples, visible): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        (samples, visible.into_iter().flatten().collect())
    }

    fn caster_boxes(&self) -> Vec<Aabb> {
        let pad = 1e-3 * self.scene.bounds.diameter();
        self.scene
            .surfaces
            .iter()
            .filter(|s| s.caster)
            .map(|s| {
                let e = s.bounds.extent();
                let grow = Vec3::new(
                    if e.x < pad { pad } else { 0.0 },
                    if e.y < pad { pad } else { 0.0 },
                    if e.z < pad { pad } else { 0.0 },
                );
                Aabb::new(s.bounds.min - grow * 0.5, s.bounds.max + grow * 0.5)
            })
            .collect()
    }

    fn build_guides(&mut self, records: &[EmissionRecord]) {
        let nl = self.scene.lights.len();
        let bounds = self.scene.bounds;
        let mut rng = stream_rng(self.config.seed, 0, STREAM_INIT, 0);
        let has_casters = self.scene.has_casters();
        self.guides = match self.config.guider {
            GuiderKind::Uniform | GuiderKind::Mcmc => vec![LightGuide::Uniform; nl],
            _ if !has_casters => vec![LightGuide::Uniform; nl],
            GuiderKind::Bound => match BoundGuide::new(self.caster_boxes()) {
                Ok(b) => vec![LightGuide::Bound(b); nl],
                Err(_) => vec![LightGuide::Uniform; nl],
            },
            GuiderKind::Vmf => self
                .scene
                .lights
                .iter()
                .map(|l| {
                    if l.is_infinite() {
                        LightGuide::Uniform
                    } else {
                        LightGuide::Vmf(VmfMixture::spread(self.config.components, 1.0))
                    }
                })
                .collect(),
            GuiderKind::H2d => self
                .scene
                .lights
                .iter()
                .map(|l| match *l {
                    Light::Directional { .. } => LightGuide::Uniform,
                    Light::Rect { normal, .. } => {
                        LightGuide::Histogram(Histogram2D::new(normal, self.config.histogram_resolution))
                    }
                    Light::Point { .. } => {
                        LightGuide::Histogram(Histogram2D::new(Vec3::Y, self.config.histogram_resolution))
                    }
                })
                .collect(),
            GuiderKind::G3d => {
                let scale = scale_factor(bounds.diameter()).expect("scene has positive extent");
                let g = self.config.components;
                let mixtures: Vec<GaussianMixture> = match self.config.init {
                    InitMode::Geometry => {
                        let mut votes = vec![Vec::new(); nl];
                        for r in records.iter().filter(|r| r.t_count > 0) {
                            if let Some(x) = r.first_bounce {
                                votes[r.light].push(x);
                            }
                        }
                        build_seed_set(&self.scene, DEFAULT_K_PER_GEOMETRY, DEFAULT_SURFACE_SAMPLES, &mut rng)
                            .and_then(|seed| init_light_mixtures(&seed, &votes, g, &mut rng))
                            .expect("scene has casters")
                    }
                    InitMode::Naive => {
                        let mut hits = vec![Vec::new(); nl];
                        for r in records {
                            if let Some(x) = r.first_bounce {
                                if hits[r.light].len() < DEFAULT_SURFACE_SAMPLES {
                                    hits[r.light].push(x);
                                }
                            }
                        }
                        hits.iter()
                            .map(|h| naive_light_mixture(h, g, scale, bounds.center, &mut rng))
                            .collect::<Result<_>>()
                            .expect("valid sigma")
                    }
                    InitMode::Off => {
                        let broad = Gaussian3::new(bounds.center, C_S * 0.5 / scale).expect("valid sigma");
                        (0..nl)
                            .map(|_| {
                                GaussianMixture::uniform(&pad_components(&[broad], g, &mut rng))
                                    .expect("nonempty")
                            })
                            .collect()
                    }
                };
                self.scene
                    .lights
                    .iter()
                    .zip(mixtures)
                    .map(|(l, m)| LightGuide::Gaussian(GaussianGuide::new(&m, scale, light_plane(l, &bounds))))
                    .collect()
            }
        };
    }

    fn train(&mut self, records: &[EmissionRecord]) {
        if records.is_empty() {
            return;
        }
        let mut per_light: Vec<Vec<EmissionRecord>> = vec![Vec::new(); self.guides.len()];
        for r in records {
            per_light[r.light].push(*r);
        }
        let (it, total) = (self.iteration, self.config.iterations);
        self.guides
            .par_iter_mut()
            .zip(per_light.par_iter())
            .for_each(|(g, recs)| g.train(recs, it, total));
    }
}
