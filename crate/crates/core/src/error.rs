use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map `{label}` sent {point:?} outside its domain")]
    DomainEscape { label: String, point: Vec<f64> },

    #[error("point {point:?} is not in the domain of map `{label}`")]
    OutsideDomain { label: String, point: Vec<f64> },

    #[error("non-finite value produced by map `{label}` at {point:?}")]
    NonFiniteValue { label: String, point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid gauge function: {0}")]
    InvalidGauge(String),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid scheme configuration: {0}")]
    InvalidScheme(String),

    #[error("unknown scheme family `{0}`")]
    UnknownFamily(String),

    #[error("alpha_{n} = {value} is below the declared floor {floor}")]
    ScheduleFloorViolated { n: usize, value: f64, floor: f64 },

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("a known fixed point is required")]
    MissingFixedPoint,

    #[error("malformed recurrence witness: {0}")]
    MalformedWitness(String),

    #[error("wrong certificate class: expected {expected}, got {actual}")]
    WrongCertificate { expected: String, actual: String },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
