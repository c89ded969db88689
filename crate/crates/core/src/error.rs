use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid lattices differ (origin {a_origin}/{b_origin}, spacing {a_spacing}/{b_spacing}, count {a_count}/{b_count}); resample first")]
    GridMismatch {
        a_origin: f64,
        b_origin: f64,
        a_spacing: f64,
        b_spacing: f64,
        a_count: usize,
        b_count: usize,
    },

    #[error("grid captures only {captured:.3e} of the mass (need at least {required})")]
    InsufficientMass { captured: f64, required: f64 },

    #[error("density truncation at radius {radius} loses {lost:.3e} of the mass")]
    TruncationLoss { radius: f64, lost: f64 },

    #[error("density integrates to {integral} over its declared support")]
    DensityNotNormalized { integral: f64 },

    #[error("unsupported representation: {0}")]
    Unsupported(String),

    #[error("kernel `{0}` has no transition density")]
    MissingDensity(String),

    #[error("degenerate update: total likelihood mass {mass:.3e} for observation {observation:?}")]
    DegenerateUpdate { observation: Vec<f64>, mass: f64 },

    #[error("particle weights collapsed (effective sample size {ess:.3})")]
    WeightCollapse { ess: f64 },

    #[error("run aborted at step {step} in the `{tag}` filter: {source}")]
    RunAborted {
        step: usize,
        tag: String,
        #[source]
        source: Box<Error>,
    },

    #[error("coupling marginals deviate from the given measures by {deviation:.3e}")]
    MarginalMismatch { deviation: f64 },

    #[error("too few usable points for a rate fit ({usable} < 5)")]
    TooFewPoints { usable: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps the error with the step and filter tag it occurred at.
    pub fn at_step(self, step: usize, tag: impl Into<String>) -> Error {
        Error::RunAborted {
            step,
            tag: tag.into(),
            source: Box::new(self),
        }
    }

    /// True when the error (or the error it wraps) is a degenerate Bayes update.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::DegenerateUpdate { .. } | Error::WeightCollapse { .. } => true,
            Error::RunAborted { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}
