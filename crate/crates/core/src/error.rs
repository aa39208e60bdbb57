use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed lattice spec, parameters, or preconditions.
    #[error("specification error: {0}")]
    Spec(String),
    /// The dense eigensolver failed to converge.
    #[error("eigensolver failed on {dim}x{dim} matrix: {detail}")]
    Solver { dim: usize, detail: String },
    /// A twist-grid computation could not be resolved at the requested
    /// resolution (band-matching ambiguity or unresolvable phase step).
    #[error("twist-grid resolution failure near phi = {phi}: {detail}")]
    Resolution { phi: f64, detail: String },
}

impl Error {
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
