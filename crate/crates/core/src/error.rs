use alloc::string::String;

/// Failures raised by geometric constructions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("slot {slot} out of range for valence ({upper},{lower})")]
    SlotOutOfRange { slot: usize, upper: usize, lower: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension {0} is not supported here: {1}")]
    Dimension(usize, &'static str),
    #[error("singular {0}")]
    Singular(&'static str),
    #[error("{what} violated (residual {residual:e}){detail}")]
    Invariant { what: &'static str, residual: f64, detail: String },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl GeometryError {
    pub fn invariant(what: &'static str, residual: f64) -> Self {
        GeometryError::Invariant { what, residual, detail: String::new() }
    }
}

pub type Result<T> = core::result::Result<T, GeometryError>;
