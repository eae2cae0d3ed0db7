use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid sizes, grids or other inconsistent setup.
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The implicit QL iteration failed to deflate an eigenvalue.
    #[error("eigensolver did not converge after {iterations} iterations (index {index})")]
    NoConvergence { iterations: usize, index: usize },

    /// Basis doubling hit the size cap before the convergence criteria held.
    #[error(
        "spectrum not converged at n_max = {n_max} (cap {cap}): energy change {energy_residual:.3e}, boundary support {boundary_support:.3e}"
    )]
    Convergence {
        n_max: usize,
        cap: usize,
        energy_residual: f64,
        boundary_support: f64,
    },

    /// The Fock basis is too small to hold a requested state.
    #[error("truncation error: tail weight {tail:.3e} beyond n_max = {n_max}; try n_max >= {suggested}")]
    Truncation {
        tail: f64,
        n_max: usize,
        suggested: usize,
    },

    /// Sweep point failure, tagged with the coupling strength.
    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}, key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
