use thiserror::Error;

use crate::fan::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive generator")]
    ZeroVector,
    #[error("vector {0:?} is not primitive")]
    NotPrimitive(Vec<String>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed linear program: {0}")]
    MalformedProgram(String),

    #[error("invalid fan: {}", fmt_violations(.0))]
    InvalidFan(Vec<Violation>),
    #[error("cone {0:?} is not simplicial")]
    NonSimplicialCone(Vec<usize>),
    #[error("vector lies outside the support of the fan")]
    OutsideSupport,
    #[error("ray index {0} is not a ray of the fan")]
    NotARay(usize),
    #[error("index set {0:?} is not a cone of the fan")]
    NotACone(Vec<usize>),
    #[error("quotient is not a fan: {}", fmt_violations(.0))]
    QuotientNotAFan(Vec<Violation>),

    #[error("divisor has {found} coefficients but the fan has {expected} rays")]
    LengthMismatch { expected: usize, found: usize },
    #[error("divisor is not Q-Cartier on maximal cone {cone}")]
    NotQCartier { cone: usize },
    #[error("the fan has no nonzero lattice points in its support")]
    EmptySupport,

    #[error("maximal cone {cone} of the source maps into no cone of the target")]
    IncompatibleMorphism { cone: usize },
    #[error("morphism is not a proper contraction: {0}")]
    NotProperContraction(String),
    #[error("pair is not log canonical over the generic point of the base divisor")]
    NotLogCanonicalOverBase,
    #[error("no source cone maps onto the requested base valuation")]
    NoCone,
    #[error("K_X + B is not R-linearly trivial over the base")]
    NotRelTrivial,

    #[error("fiber fan has {found} rays, expected {expected}")]
    WrongRayCount { expected: usize, found: usize },
    #[error("fiber fan is not complete")]
    NotComplete,
    #[error("fiber rays admit no positive linear relation")]
    NoPositiveRelation,
    #[error("relative dimension {0} is too small, at least 2 is required")]
    RelativeDimensionTooSmall(usize),
    #[error("not a Mori fiber space shape: {0}")]
    NotMfsShape(String),
    #[error("-K_X is not ample over the base")]
    NotRelativelyAmple,
    #[error("factorization diagram check failed: {0}")]
    DiagramCheck(String),

    #[error("domain error: {0}")]
    DomainError(String),
    #[error("construction invariant failed: {0}")]
    ConstructionInvariantFailure(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Input-shaped failures (bad documents or parameters) as opposed to
    /// computational outcomes.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::InvalidFan(_)
                | Error::LengthMismatch { .. }
                | Error::DimensionMismatch { .. }
                | Error::NotPrimitive(_)
                | Error::ZeroVector
                | Error::DomainError(_)
                | Error::NotARay(_)
                | Error::NotACone(_)
                | Error::IncompatibleMorphism { .. }
        )
    }
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
