use core::fmt;

/// Errors raised by the vortex model and the analyses built on it.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two vortices closer than the configured minimum separation.
    Collision {
        pair: (usize, usize),
        separation: f64,
    },
    /// An argument outside the domain of a formula or chart.
    Domain(&'static str),
    /// Strengths, radius or state that violate the model invariants.
    InvalidSystem(&'static str),
    /// State length does not match the number of strengths.
    DimensionMismatch { expected: usize, found: usize },
    /// The momentum perturbation equations have no admissible solution.
    NoSolution(&'static str),
    /// Closed forms are only available for a restricted set of N.
    UnsupportedN(usize),
    /// A bisection bracket whose endpoints do not straddle a sign change.
    NoSignChange { lo: f64, hi: f64 },
    /// The admissible subspace has an unexpected dimension (nontrivial isotropy).
    DegenerateSubspace { expected: usize, found: usize },
    /// The Euclidean mean of the vortices is too close to the origin.
    DegenerateMean,
    /// Not enough samples for a drift-rate fit.
    InsufficientSamples { needed: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Collision { pair, separation } => write!(
                f,
                "vortices {} and {} collided (separation {separation:e})",
                pair.0, pair.1
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidSystem(msg) => write!(f, "invalid system: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} vortices, found {found}")
            }
            Error::NoSolution(msg) => write!(f, "no solution: {msg}"),
            Error::UnsupportedN(n) => write!(f, "no closed form available for N = {n}"),
            Error::NoSignChange { lo, hi } => {
                write!(f, "no sign change in bracket ({lo}, {hi})")
            }
            Error::DegenerateSubspace { expected, found } => write!(
                f,
                "admissible subspace has dimension {found}, expected {expected}"
            ),
            Error::DegenerateMean => write!(f, "vortex mean is too close to the origin"),
            Error::InsufficientSamples { needed, found } => {
                write!(f, "need at least {needed} samples, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
