use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Green's function is singular at the origin")]
    Singularity,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{what}: no convergence after {iterations} iterations")]
    IterationLimit { what: &'static str, iterations: usize },
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("degenerate constraint basis: {0}")]
    Degenerate(String),
    #[error("auxiliary iteration does not contract (measured factor {factor:.3e} after {iterations} steps)")]
    NonContraction { factor: f64, iterations: usize },
    #[error(
        "reduced functional attains its minimum on the boundary of the admissible interval (r = {r:.6}, {side} end)"
    )]
    BoundaryMinimum { r: f64, side: &'static str },
    #[error("peak verification failed: {0}")]
    PeakVerification(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("decay fit rejected: {0}")]
    FitQuality(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse(_) | Error::Domain(_))
    }
}
