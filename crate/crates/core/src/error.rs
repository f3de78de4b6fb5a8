use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },
    #[error("{function}: argument {value} outside supported range {limit}")]
    Range {
        function: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("integrand returned non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("root not bracketed on [{lower}, {upper}]")]
    NotBracketed { lower: f64, upper: f64 },
    #[error("no zero of {what} found below {limit}")]
    NoRoot { what: &'static str, limit: f64 },
    #[error("no quantized solution for nu = {nu} with a in (0, {a_max}]")]
    NoSolution { nu: f64, a_max: f64 },
    #[error("target {target} not attainable for nu in [{nu_min}, {nu_max}]")]
    Bracketing {
        target: f64,
        nu_min: f64,
        nu_max: f64,
    },
    #[error("no bound state with {nodes} nodes for lambda in ({lambda_min}, 0)")]
    NoBoundState { nodes: usize, lambda_min: f64 },
    #[error("singular jacobian: {0}")]
    SingularJacobian(String),
    #[error("surrogate potential requested without Morse parameters")]
    MissingMorseParams,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DOMAIN",
            Error::Range { .. } => "RANGE",
            Error::NonConvergence { .. } => "NON_CONVERGENCE",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::NotBracketed { .. } => "NOT_BRACKETED",
            Error::NoRoot { .. } => "NO_ROOT",
            Error::NoSolution { .. } => "NO_SOLUTION",
            Error::Bracketing { .. } => "BRACKETING",
            Error::NoBoundState { .. } => "NO_BOUND_STATE",
            Error::SingularJacobian(_) => "SINGULAR_JACOBIAN",
            Error::MissingMorseParams => "MISSING_MORSE_PARAMS",
            Error::InvalidInput(_) => "INVALID_INPUT",
        }
    }

    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
