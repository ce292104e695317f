//! Experiment harness around `g3d-core`: scene files, image and metric
//! output, render orchestration and distribution plots.

pub mod harness;
pub mod image_io;
pub mod metrics;
pub mod scene_io;
pub mod viz;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Obj {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Scene {
        path: PathBuf,
        #[source]
        source: g3d_core::Error,
    },
    #[error(transparent)]
    Core(#[from] g3d_core::Error),
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (usize, usize), b: (usize, usize) },
    #[error("image must be at least {min} x {min} pixels")]
    ImageTooSmall { min: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
