use thiserror::Error;

/// Errors raised by the solvers, the diagnostics and the run front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed arrays or parameters that break an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Time step too large for the positivity-preserving CFL bound.
    #[error("CFL condition violated: lambda = {lambda:.6e} exceeds limit {limit:.6e}")]
    Cfl { lambda: f64, limit: f64 },

    /// A monitored invariant (positivity, mass, ...) failed during a run.
    #[error("invariant failure at t = {t}: {what}")]
    Invariant { t: f64, what: String },

    /// Two inputs that should carry the same mass do not.
    #[error("mass mismatch: {0} vs {1}")]
    MassMismatch(f64, f64),

    /// Invalid configuration (unknown preset, incompatible options, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Config text could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
