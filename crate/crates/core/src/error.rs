use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid gaussian: sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("invalid gaussian: mean must be finite")]
    NonFiniteMean,
    #[error("mixture must have at least one component")]
    EmptyMixture,
    #[error("mixture weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("scene bounding diameter must be positive, got {0}")]
    NonPositiveDiameter(f64),
    #[error("k-means needs K <= number of points (K = {k}, points = {n})")]
    TooManyClusters { k: usize, n: usize },
    #[error("no caster geometry to sample")]
    NoCasters,
    #[error("light index {index} out of range for {count} lights")]
    LightOutOfRange { index: usize, count: usize },
    #[error("bounding box has zero volume")]
    DegenerateBox,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
