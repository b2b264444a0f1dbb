use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value needed more p-adic digits than the working precision carries.
    #[error("precision exhausted in {context}; at least {required} digits needed")]
    PrecisionExhausted { context: String, required: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("element is not in the unitary group: {0}")]
    InvalidGroupElement(String),
    #[error("stratum is not valid: {0}")]
    InvalidStratum(String),
    #[error("characteristic polynomial is a power of one irreducible; no splitting")]
    NotSplittable,
    #[error("reduction case analysis failed: {0}")]
    ClassificationFailure(String),
    #[error("normal form search failed: {0}")]
    NormalizationFailure(String),
    #[error("unsupported element: {0}")]
    Unsupported(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl Error {
    pub fn precision(context: impl Into<String>, required: u32) -> Self {
        Error::PrecisionExhausted { context: context.into(), required }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
