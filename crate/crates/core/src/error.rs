use thiserror::Error;

/// Every failure the library reports. `code()` gives a stable machine-readable tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("could not parse input: {0}")]
    Parse(String),
    #[error("polynomial degree must be at least 2")]
    DegreeTooSmall,
    #[error("polynomial must be monic with integer coefficients")]
    NotMonic,
    #[error("polynomial is reducible over Q (factor {0})")]
    NotIrreducible(String),
    #[error("polynomial is not the minimal polynomial of a Pisot number: {0}")]
    NotPisot(String),
    #[error("sign could not be decided within the refinement cap")]
    PrecisionExhausted,
    #[error("element is not in Z[beta]")]
    NotIntegral,
    #[error("element is not in [0,1)")]
    OutOfDomain,
    #[error("orbit did not close within {0} steps")]
    CycleNotFound(usize),
    #[error("base point must lie in [0,1)")]
    NotInHalfOpenUnit,
    #[error("base point is not in Z[1/beta]")]
    NotBetaRational,
    #[error("point does not lie in [v, v^) for the given v")]
    WrongInterval,
    #[error("clouds must have consecutive levels")]
    LevelMismatch,
    #[error("the lattice L has rank below d-1")]
    QmViolated,
    #[error("translate is not an element of L")]
    NotInLattice,
    #[error("lattice box too large: {0} points")]
    BoxTooLarge(u64),
    #[error("iteration cap exceeded after {0} steps")]
    IterationCapExceeded(usize),
    #[error("exclusive point construction failed: {0}")]
    ConstructionFailed(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("level {0} is too low for this estimate")]
    LevelTooLow(u32),
    #[error("integer overflow in fixed-width kernel")]
    Overflow,
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "Parse",
            Error::DegreeTooSmall => "DegreeTooSmall",
            Error::NotMonic => "NotMonic",
            Error::NotIrreducible(_) => "NotIrreducible",
            Error::NotPisot(_) => "NotPisot",
            Error::PrecisionExhausted => "PrecisionExhausted",
            Error::NotIntegral => "NotIntegral",
            Error::OutOfDomain => "OutOfDomain",
            Error::CycleNotFound(_) => "CycleNotFound",
            Error::NotInHalfOpenUnit => "NotInHalfOpenUnit",
            Error::NotBetaRational => "NotBetaRational",
            Error::WrongInterval => "WrongInterval",
            Error::LevelMismatch => "LevelMismatch",
            Error::QmViolated => "QMViolated",
            Error::NotInLattice => "NotInLattice",
            Error::BoxTooLarge(_) => "BoxTooLarge",
            Error::IterationCapExceeded(_) => "IterationCapExceeded",
            Error::ConstructionFailed(_) => "ConstructionFailed",
            Error::BadParameters(_) => "BadParameters",
            Error::LevelTooLow(_) => "LevelTooLow",
            Error::Overflow => "Overflow",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
