//! Reverse-KL fitting of Gaussian mixtures from photon feedback.

mod adam;
mod encoding;
mod kl;

pub use adam::{AdamConfig, AdamState};
pub use encoding::{scale_factor, EncodedComponent, EncodedMixture, C_B, C_S, PARAMS_PER_COMPONENT};
pub use kl::{grad_log_mixture, kl_gradient, kl_step, lr_schedule, TrainingSample};
