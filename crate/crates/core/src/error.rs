use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Evaluation point or parameter outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {what} needs {requested} elements, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: usize,
    },

    #[error("rank deficient: numerical rank {rank}, required {required} (condition estimate {condition:e})")]
    RankDeficient {
        rank: usize,
        required: usize,
        condition: f64,
    },

    /// The requested operation is not defined in the current parameter regime.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("linear algebra: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

/// Default cap on the number of scalar elements a single random draw may allocate.
pub const DEFAULT_ELEMENT_CAP: usize = 100_000_000;

pub(crate) fn check_cap(what: &'static str, dims: &[usize], cap: usize) -> Result<()> {
    let requested = dims.iter().map(|&d| d as u128).product::<u128>();
    if requested > cap as u128 {
        return Err(Error::Resource {
            what,
            requested,
            cap,
        });
    }
    Ok(())
}
