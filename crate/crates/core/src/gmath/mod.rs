//! Isotropic 3D Gaussians, their mixtures, and the directional transform.

mod directional;
mod erf;
mod gaussian;
mod plane;

pub use directional::{
    directional_pdf, directional_pdf_component, directional_pdf_mixture, pole, sample_direction,
    sample_direction_mixture, unnormalized_directional, DirectionalView, DEGENERATE_POLE,
};
pub use erf::erf_approx;
pub use gaussian::{eval_gaussian, mixture_density, Gaussian3, GaussianMixture, MixtureComponent};
pub use plane::{
    project_mixture_to_plane, sample_plane_point, Gaussian2, PlaneFrame, ProjectedMixture,
};
