use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("feature width mismatch: model expects {expected} columns, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("class {0} has no instances")]
    MissingClass(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{kind} score {value} outside its range")]
    OutOfRange { kind: &'static str, value: f64 },
    #[error("unknown protocol {name:?}; expected [MP][AT][EDP]-(GA|UMDA), e.g. MTD-UMDA")]
    Protocol { name: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
