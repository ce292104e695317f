//! Photon emission guiding with per-light isotropic 3D Gaussian mixtures.

pub mod diagnostics;
pub mod error;
pub mod gmath;
pub mod guide;
pub mod initializer;
pub mod light_tree;
pub mod optimizer;
pub mod render;
pub mod sampling;
pub mod scene;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::{Rgb, Vec3};
