use alloc::string::String;

/// Errors raised by the algebraic and numeric layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not skew-symmetric")]
    NotSkewSymmetric,

    #[error("cannot complete to full rank: need {needed} extra columns, only {available} possible")]
    CannotComplete { needed: usize, available: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("last {p} rows of M are not zero; apply a decoupling QMT first")]
    NotDecoupledForm { p: usize },

    #[error("cannot decouple {requested} variables: only {available} quasimonomial invariants exist")]
    InsufficientDegeneracy { requested: usize, available: usize },

    #[error("factorization does not certify this system")]
    InvalidFactorization,

    #[error("scaling factor {0} is not rational")]
    NonRationalScaling(String),

    #[error("state blew up (|ln x| > 700) at t = {t}")]
    BlowUp { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("chart mismatch between trajectory and quantity")]
    ChartMismatch,
}

pub type Result<T> = core::result::Result<T, Error>;
