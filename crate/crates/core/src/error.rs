use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "laplace inversion ill-conditioned at t={t}: orders {order_lo} and {order_hi} disagree by {gap:e} (tolerance {tolerance:e})"
    )]
    IllConditioned {
        t: f64,
        order_lo: usize,
        order_hi: usize,
        gap: f64,
        tolerance: f64,
    },

    #[error(
        "eigen-series truncation budget exhausted after {terms} terms: tail bound {tail_bound:e} exceeds tolerance {tolerance:e}"
    )]
    Truncation {
        terms: usize,
        tail_bound: f64,
        tolerance: f64,
    },

    #[error("time {t} is beyond the sampled path horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("tempered-stable rejection sampler exceeded {cap} rejections")]
    ResampleCap { cap: u64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("unresolved tail: {0}")]
    UnresolvedTail(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}
