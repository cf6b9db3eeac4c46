use thiserror::Error;

/// Errors raised by the simulator backends, the circuit front end and the
/// algorithm drivers.
#[derive(Debug, Error)]
pub enum CvError {
    /// Array or matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A parameter lies outside the range an operation supports.
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid or backend configuration cannot support the request.
    #[error("configuration error: {0}")]
    Config(String),

    /// A constructor produced a state with no weight anywhere.
    #[error("degenerate state: all sampled amplitudes are zero")]
    Degenerate,

    /// A precondition on the input state or operator was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A displacement would wrap mass around the periodic grid.
    #[error("displacement {shift} exceeds the wraparound guard {limit}")]
    Wraparound { shift: f64, limit: f64 },

    /// Too much population reached the top of a truncated Fock basis.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// The request would allocate more than the backend allows.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Two objects in one computation carry different values of hbar.
    #[error("hbar mismatch: {left} vs {right}")]
    HbarMismatch { left: f64, right: f64 },

    /// The circuit cannot run on the requested backend.
    #[error("capability mismatch: {0}")]
    Capability(String),

    #[error(transparent)]
    Parse(#[from] crate::circuit::ParseError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CvResult<T> = Result<T, CvError>;

pub(crate) fn check_len(expected: usize, found: usize) -> CvResult<()> {
    if expected == found {
        Ok(())
    } else {
        Err(CvError::Dimension { expected, found })
    }
}
