use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("channel is not trace preserving (completeness deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("empty Kraus list")]
    EmptyChannel,

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("unphysical Bloch vector: |r| = {norm}")]
    Unphysical { norm: f64 },

    #[error("invalid mixture parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("{what} did not converge (best value {best})")]
    Convergence { what: String, best: f64 },

    #[error("no valid random process matrix after {attempts} attempts")]
    GenerationFailed { attempts: usize },
}
