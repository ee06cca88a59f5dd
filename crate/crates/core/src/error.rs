//! Error type shared by every stage of the solver.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("point {t} lies outside [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("coefficient is not positive: q({t}) = {value}")]
    QNotPositive { t: f64, value: f64 },

    #[error("linearized Riccati operator is singular (zero entry in r)")]
    SingularLinearization,

    #[error("Newton iteration did not converge within {iterations} iterations")]
    NewtonDivergence { iterations: usize },

    #[error("singular linear system")]
    SingularSystem,

    #[error("degenerate phase: {0}")]
    DegeneratePhase(String),

    #[error("interval refinement exceeded the depth limit near [{a}, {b}]")]
    NonConvergentRefinement { a: f64, b: f64 },

    #[error("no discretization interval lies in the high-frequency regime")]
    NoHighFrequencyInterval,

    #[error("boundary conditions are ill-conditioned (|det| = {det:e})")]
    IllConditionedBc { det: f64 },

    #[error("format error on line {line}: {message}")]
    Format { line: usize, message: String },
}

impl Error {
    /// Stable machine-readable name, used by the CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NumericFailure(_) => "NumericFailure",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::Parse { .. } => "ParseError",
            Error::QNotPositive { .. } => "QNotPositive",
            Error::SingularLinearization => "SingularLinearization",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::SingularSystem => "SingularSystem",
            Error::DegeneratePhase(_) => "DegeneratePhase",
            Error::NonConvergentRefinement { .. } => "NonConvergentRefinement",
            Error::NoHighFrequencyInterval => "NoHighFrequencyInterval",
            Error::IllConditionedBc { .. } => "IllConditionedBC",
            Error::Format { .. } => "FormatError",
        }
    }
}
