use thiserror::Error;

use crate::counters::FeatureId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("feature {0} has never been seen with value 1")]
    UnknownFeature(FeatureId),
    #[error("impurity of an empty dataset is undefined")]
    EmptyStore,
    #[error("parameter {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
    #[error("decomposition is undefined at theta = {0} for the entropy measure")]
    BoundaryTheta(f64),
    #[error("inconsistent counters: {0}")]
    InconsistentCounts(String),
    #[error("invalid bucket index: {0}")]
    InvalidBin(String),
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
