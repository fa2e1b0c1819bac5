use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("timescale `{name}` must be positive and finite, got {value}")]
    NonPositiveTimescale { name: &'static str, value: f64 },

    #[error("inconsistent timescales: 1/t2 = {inv_t2} but 1/(2 t1) + 1/tphi = {expected}")]
    InconsistentT2 { inv_t2: f64, expected: f64 },

    #[error("magnetization out of range: {0}")]
    MagnetizationOutOfRange(String),

    #[error("underdetermined timescales: {0}")]
    MissingTimescale(String),

    #[error("value `{name}` is not finite")]
    NonFinite { name: &'static str },

    #[error("density matrix is not physical: {0}")]
    NonPhysicalState(String),

    #[error("negative duration {0}")]
    NegativeDuration(f64),

    #[error("matrix exponential did not converge")]
    ExponentialNotConverged,

    #[error("line {line}, column {col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },

    #[error("missing directive `{0}`")]
    MissingDirective(&'static str),

    #[error("line {line}: duplicate directive `{name}`")]
    DuplicateDirective { name: &'static str, line: usize },

    #[error("line {line}, column {col}: {message}")]
    Unit { line: usize, col: usize, message: String },

    #[error("series has {got} samples, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("invalid padding {pad} for {samples} samples (must be a power of two >= sample count)")]
    InvalidPadding { pad: usize, samples: usize },

    #[error("power-law fit did not converge after {iterations} iterations (gradient norm {gradient})")]
    FitNotConverged { iterations: usize, gradient: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Source position for parser errors.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::Syntax { line, col, .. } | Error::Unit { line, col, .. } => Some((*line, *col)),
            Error::DuplicateDirective { line, .. } => Some((*line, 1)),
            _ => None,
        }
    }

    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::MissingDirective(_) | Error::DuplicateDirective { .. } | Error::Unit { .. }
        )
    }
}
