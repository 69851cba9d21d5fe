use thiserror::Error;

/// Failures surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid law, flow, or model parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Pullback iteration hit its depth limit before the residual fell below tolerance.
    #[error("pullback did not converge: residual {residual:.3e} after {depth} steps (tol {tol:.3e})")]
    NonConvergence {
        depth: usize,
        residual: f64,
        tol: f64,
        history: Vec<f64>,
    },

    /// A numerical routine failed (bracket growth, root finding, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Sampled data violated a structural bound; usually a flow bug.
    #[error("data error: {0}")]
    Data(String),

    /// A fixed environment ran out of switching pairs.
    #[error("fixed environment exhausted after {available} pairs")]
    Exhausted { available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
