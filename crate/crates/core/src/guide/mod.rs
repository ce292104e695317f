//! Emission guiders: the learned Gaussian mixture and the comparison baselines.

pub mod bound;
pub mod histogram;
pub mod mcmc;
pub mod vmf;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use bound::BoundGuide;
pub use histogram::Histogram2D;
pub use mcmc::{McmcChain, PssState, VisibilityEstimate};
pub use vmf::{DirectionSample, VmfLobe, VmfMixture};

use crate::gmath::{
    directional_pdf_mixture, project_mixture_to_plane, sample_direction, GaussianMixture,
    PlaneFrame, ProjectedMixture,
};
use crate::optimizer::{kl_step, lr_schedule, AdamConfig, AdamState, EncodedMixture, TrainingSample};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuiderKind {
    #[default]
    G3d,
    Uniform,
    Bound,
    H2d,
    Vmf,
    Mcmc,
}

impl GuiderKind {
    pub const ALL: [GuiderKind; 6] = [
        GuiderKind::G3d,
        GuiderKind::Uniform,
        GuiderKind::Bound,
        GuiderKind::H2d,
        GuiderKind::Vmf,
        GuiderKind::Mcmc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GuiderKind::G3d => "g3d",
            GuiderKind::Uniform => "uniform",
            GuiderKind::Bound => "bound",
            GuiderKind::H2d => "h2d",
            GuiderKind::Vmf => "vmf",
            GuiderKind::Mcmc => "mcmc",
        }
    }
}

impl fmt::Display for GuiderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GuiderKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        GuiderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::Error::InvalidConfig(format!("unknown guider '{s}'")))
    }
}

/// Everything the renderer remembers about one emitted photon for training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmissionRecord {
    pub light: usize,
    pub x0: Vec3,
    pub omega: Vec3,
    pub first_bounce: Option<Vec3>,
    /// Full emission density including the light selection probability.
    pub q_hat: f64,
    pub t_count: u32,
}

/// Learned spatial mixture with its optimizer state.
#[derive(Clone, Debug)]
pub struct GaussianGuide {
    pub enc: EncodedMixture,
    adam: AdamState,
    mixture: GaussianMixture,
    plane: Option<PlaneFrame>,
    projected: Option<ProjectedMixture>,
}

impl GaussianGuide {
    /// `plane` is set for infinite lights, whose emission origins live on it.
    pub fn new(m: &GaussianMixture, scale: f64, plane: Option<PlaneFrame>) -> Self {
        let enc = EncodedMixture::encode(m, scale);
        let adam = AdamState::new(enc.num_params(), AdamConfig::default());
        let mut g = Self {
            mixture: enc.decode(),
            enc,
            adam,
            plane,
            projected: None,
        };
        g.refresh();
        g
    }

    fn refresh(&mut self) {
        self.mixture = self.enc.decode();
        self.projected = self
            .plane
            .map(|p| project_mixture_to_plane(&self.mixture, p.origin, p.normal()));
    }

    pub fn mixture(&self) -> &GaussianMixture {
        &self.mixture
    }

    pub fn train(&mut self, batch: &[TrainingSample], lr: f64) {
        kl_step(&mut self.enc, &mut self.adam, batch, lr);
        self.refresh();
    }
}

#[derive(Clone, Debug)]
pub enum LightGuide {
    Uniform,
    Gaussian(GaussianGuide),
    Vmf(VmfMixture),
    Histogram(Histogram2D),
    Bound(BoundGuide),
}

impl LightGuide {
    /// Whether this guide can steer directions from a finite light.
    pub fn guides_directions(&self) -> bool {
        !matches!(self, LightGuide::Uniform)
    }

    /// Whether this guide can steer origins on an infinite light's plane.
    /// The purely directional baselines cannot.
    pub fn guides_plane(&self) -> bool {
        matches!(self, LightGuide::Gaussian(_) | LightGuide::Bound(_))
    }

    /// Draws a direction from `x0`. Only valid when [`Self::guides_directions`].
    pub fn sample_direction<R: Rng + ?Sized>(&self, x0: Vec3, rng: &mut R) -> Vec3 {
        match self {
            LightGuide::Gaussian(g) => {
                let m = g.mixture();
                let i = m.select(rng.random());
                sample_direction(&m.components()[i].gaussian, x0, rng)
            }
            LightGuide::Vmf(v) => v.sample(rng).0,
            LightGuide::Histogram(h) => h.sample(rng).0,
            LightGuide::Bound(b) => loop {
                if let Some((w, _)) = b.sample(x0, rng) {
                    break w;
                }
            },
            LightGuide::Uniform => panic!("uniform guide has no guided branch"),
        }
    }

    pub fn direction_pdf(&self, x0: Vec3, omega: Vec3) -> f64 {
        match self {
            LightGuide::Gaussian(g) => directional_pdf_mixture(g.mixture(), x0, omega),
            LightGuide::Vmf(v) => v.pdf(omega),
            LightGuide::Histogram(h) => h.pdf(omega),
            LightGuide::Bound(b) => b.pdf(x0, omega),
            LightGuide::Uniform => 0.0,
        }
    }

    /// Draws plane coordinates. Only valid when [`Self::guides_plane`].
    pub fn sample_plane<R: Rng + ?Sized>(&self, plane: &PlaneFrame, rng: &mut R) -> [f64; 2] {
        match self {
            LightGuide::Gaussian(g) => match &g.projected {
                Some(pm) => pm.sample(rng).0,
                None => project_mixture_to_plane(g.mixture(), plane.origin, plane.normal())
                    .sample(rng)
                    .0,
            },
            LightGuide::Bound(b) => b.sample_plane(plane, rng).0,
            _ => panic!("guide has no plane branch"),
        }
    }

    pub fn plane_pdf(&self, plane: &PlaneFrame, p: [f64; 2]) -> f64 {
        match self {
            LightGuide::Gaussian(g) => match &g.projected {
                Some(pm) => pm.pdf(p),
                None => project_mixture_to_plane(g.mixture(), plane.origin, plane.normal()).pdf(p),
            },
            LightGuide::Bound(b) => b.plane_pdf(plane, p),
            _ => 0.0,
        }
    }

    /// Updates the guide from one iteration's records of its light.
    pub fn train(&mut self, records: &[EmissionRecord], iteration: usize, total: usize) {
        let lr = lr_schedule(iteration, total);
        match self {
            LightGuide::Uniform => {}
            LightGuide::Gaussian(g) => {
                let batch: Vec<TrainingSample> = records
                    .iter()
                    .filter_map(|r| {
                        r.first_bounce.map(|x| TrainingSample {
                            x,
                            q_hat: r.q_hat,
                            t_count: r.t_count,
                        })
                    })
                    .collect();
                if !batch.is_empty() {
                    g.train(&batch, lr);
                }
            }
            LightGuide::Vmf(v) => {
                let batch: Vec<DirectionSample> = records
                    .iter()
                    .filter(|r| r.first_bounce.is_some())
                    .map(|r| DirectionSample {
                        omega: r.omega,
                        q_hat: r.q_hat,
                        t_count: r.t_count,
                    })
                    .collect();
                if !batch.is_empty() {
                    v.kl_step(&batch, lr);
                }
            }
            LightGuide::Histogram(h) => {
                for r in records.iter().filter(|r| r.t_count > 0 && r.q_hat > 0.0) {
                    h.record(r.omega, r.t_count as f64 / r.q_hat);
                }
                h.rebuild();
            }
            LightGuide::Bound(b) => {
                let mut counts = vec![0.0; b.boxes.len()];
                for r in records.iter().filter(|r| r.t_count > 0) {
                    if let Some(x) = r.first_bounce {
                        counts[b.box_of(x)] += r.t_count as f64;
                    }
                }
                b.update_weights(&counts);
            }
        }
    }
}
