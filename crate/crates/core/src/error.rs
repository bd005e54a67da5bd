use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit reports.
///
/// Variants group into domain failures (the computation ran but the physics
/// says no, e.g. no trapping minimum or a fit that does not converge) and
/// usage failures (bad input, bad config). [`Error::is_usage`] draws that
/// line for the CLI exit-code contract.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid mesh request: {0}")]
    InvalidMeshRequest(String),
    #[error("mesh would need {required} nodes, budget is {budget}")]
    BudgetExceeded { required: usize, budget: usize },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("linear solve did not converge (relative residual {residual:.3e})")]
    Convergence { residual: f64 },
    #[error("invalid corner: {0}")]
    InvalidCorner(String),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("field kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("no trap: {0}")]
    NoTrap(String),
    #[error("potential is a saddle at the stationary point (Hessian eigenvalues {0:.3e}, {1:.3e})")]
    Saddle(f64, f64),
    #[error("no resonance found: {0}")]
    NoResonance(String),
    #[error("fit failed: {reason} (residual norm {residual:.3e})")]
    FitFailure { reason: String, residual: f64 },
    #[error("optimization error: {0}")]
    Optimization(String),
    #[error("integrator error: {0}")]
    Integrator(String),
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("unknown key `{key}` in section [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("unit error for `{key}`: {message}")]
    Unit { key: String, message: String },
    #[error("missing required field `{field}` in section [{section}]")]
    MissingField { section: String, field: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by the caller's input rather than by the physics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Configuration(_)
                | Error::Parse { .. }
                | Error::UnknownKey { .. }
                | Error::Unit { .. }
                | Error::MissingField { .. }
                | Error::Usage(_)
                | Error::InvalidGeometry(_)
                | Error::InvalidMeshRequest(_)
                | Error::BudgetExceeded { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
