use alloc::string::String;

/// Errors raised by dataset construction, parameter validation and the optimizer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input contains no observations")]
    EmptyInput,
    #[error("entity identifiers must be non-empty")]
    EmptyEntityId,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("description dimension must be at least 1")]
    ZeroDimension,
    #[error("duplicate observation for entity `{entity}` at timestamp {timestamp}")]
    DuplicateObservation { entity: String, timestamp: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("parameter `{name}` = {value} is outside its legal domain")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("requested {clusters} clusters but only {observations} observations are available")]
    TooManyClusters { clusters: usize, observations: usize },
    #[error("cluster index {index} out of range for {clusters} clusters")]
    ClusterIndex { index: usize, clusters: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("preprocessing failed: {0}")]
    Preprocess(String),
    #[error("{0} is undefined for this input")]
    Undefined(&'static str),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("need at least {required} observations, found {found}")]
    NotEnoughObservations { required: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
