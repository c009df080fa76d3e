use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::funcexpr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    DivisionByZero,
    LogOfZero,
}

impl fmt::Display for SingularityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityKind::DivisionByZero => f.write_str("division by zero"),
            SingularityKind::LogOfZero => f.write_str("log of zero"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("singularity ({kind}) at {at}")]
    Singularity {
        kind: SingularityKind,
        at: Complex64,
    },

    #[error("dilatation undefined at {0}: h' vanishes")]
    UndefinedDilatation(Complex64),

    #[error("point {0} is not inside the open unit disk")]
    OutsideDisk(Complex64),

    #[error("non-finite input")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phi evaluated outside its domain at r = {0}")]
    PhiDomain(f64),

    #[error("every grid point was singular")]
    AllSingular,

    #[error("not a usable blow-up probe: sup F(1, .) = {0} <= 1")]
    NotApplicable(f64),

    #[error("bisection failed to bracket F = 1: {0}")]
    BracketFailure(String),

    #[error("{0}")]
    Io(String),
}
