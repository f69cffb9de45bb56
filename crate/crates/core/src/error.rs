use thiserror::Error;

/// Errors raised by the exact and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live in different quadratic fields: sqrt({0}) vs sqrt({1})")]
    MixedDiscriminants(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("discriminant {0} cannot be certified squarefree within the trial-division bound")]
    DiscriminantTooLarge(u64),
    #[error("invalid number literal {0:?}: {1}")]
    Parse(String, String),
    #[error("base {0} is not greater than one")]
    BetaNotGreaterThanOne(String),
    #[error("factor list is empty")]
    EmptyFactorList,
    #[error("point {0} is outside [0, 1)")]
    PointOutOfRange(String),
    #[error("invalid map descriptor {0:?}: {1}")]
    MapDescriptor(String, String),
    #[error("orbit is not finite: {0}")]
    OrbitNotFinite(String),
    #[error("no positive normalized fixed point: {0}")]
    NoPositiveFixedPoint(String),
    #[error("density series tail {0} exceeds the convergence threshold")]
    TailNotConvergent(f64),
    #[error("{p} and {q} are not coprime")]
    NotCoprime { p: u64, q: u64 },
    #[error("need p > q > 1, got p = {p}, q = {q}")]
    QNotLessThanP { p: u64, q: u64 },
    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable identifier, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MixedDiscriminants(..) => "MixedDiscriminants",
            Error::DivisionByZero => "DivisionByZero",
            Error::DiscriminantTooLarge(_) => "DiscriminantTooLarge",
            Error::Parse(..) => "ParseError",
            Error::BetaNotGreaterThanOne(_) => "BetaNotGreaterThanOne",
            Error::EmptyFactorList => "EmptyFactorList",
            Error::PointOutOfRange(_) => "PointOutOfRange",
            Error::MapDescriptor(..) => "MapDescriptor",
            Error::OrbitNotFinite(_) => "OrbitNotFinite",
            Error::NoPositiveFixedPoint(_) => "NoPositiveFixedPoint",
            Error::TailNotConvergent(_) => "TailNotConvergent",
            Error::NotCoprime { .. } => "NotCoprime",
            Error::QNotLessThanP { .. } => "QNotLessThanP",
            Error::NonConvergence(_) => "NonConvergence",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
