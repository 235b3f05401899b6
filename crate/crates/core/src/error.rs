use alloc::string::String;

use crate::dsl::{ParseError, Span};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("jet level {level} out of range (max order {max})")]
    Order { level: usize, max: usize },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("{func} undefined for argument {value} at bytes {}..{}", span.start, span.end)]
    Domain {
        func: &'static str,
        value: f64,
        span: Span,
    },

    #[error("non-finite value produced at bytes {}..{}", span.start, span.end)]
    NonFinite { span: Span },

    #[error("unknown metric or factor `{0}`")]
    UnknownName(String),

    #[error("{name} does not support dimension {dim}")]
    UnsupportedDim { name: String, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("form degree mismatch: expected {expected}, found {found}")]
    Degree { expected: usize, found: usize },

    #[error("operator not semi-basic (residual {residual:e})")]
    NotSemiBasic { residual: f64 },

    #[error("not a Finsler metric at this point: {0}")]
    NotFinsler(&'static str),

    #[error("projective factor is not 1-homogeneous (residual {residual:e})")]
    NotHomogeneous { residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
