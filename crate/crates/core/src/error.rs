use core::fmt;

/// Errors raised by the numerical core.
///
/// Every variant names the guard that tripped, so a front end can map them
/// onto exit codes (`is_validation` vs numerical guards).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix used as the cusp basis `D` is singular.
    SingularD,
    /// The last column of `D` is not `η = (1/n)(1/μ_1, …, 1/μ_n)`.
    BadEta,
    /// Invariant of an input type violated; the message names it.
    InvalidInput(&'static str),
    /// Reduction did not settle within the move budget.
    NonTermination { moves: u32 },
    /// `ζ(s)` requested at the pole `s = 1`.
    PoleAtOne,
    /// Scattering constant requested at (or numerically at) a pole.
    PoleHit,
    /// Scattering constant not available for this lattice.
    UnsupportedLattice,
    /// `P_m(s)` has a vanishing denominator factor.
    PoleInDenominator,
    /// Support of the cut-off too short for two unit ramps.
    DegenerateSupport,
    /// A weight series could not be truncated to the requested tolerance.
    TruncationFailure { tail: f64, head: f64 },
    /// Quadrature refinement exhausted its budget.
    QuadratureBudgetExceeded,
    /// Finite-difference step underflowed for the requested point.
    StepSizeUnderflow,
    /// Test function has empty support.
    InsufficientSupport,
    /// Importance weights degenerate; widen the proposal window.
    ProposalMismatch,
    /// A computed norm fell outside its analytic upper/lower bounds.
    BracketViolation { lower: f64, value: f64, upper: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad caller input rather than a numerical guard.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::SingularD | Error::BadEta | Error::InvalidInput(_) | Error::UnsupportedLattice
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularD => write!(f, "cusp basis matrix D is singular"),
            Error::BadEta => write!(f, "last column of D must be eta = (1/n)(1/mu_j)"),
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::NonTermination { moves } => {
                write!(f, "reduction did not terminate after {moves} moves")
            }
            Error::PoleAtOne => write!(f, "zeta evaluated at its pole s = 1"),
            Error::PoleHit => write!(f, "scattering constant evaluated at a pole"),
            Error::UnsupportedLattice => write!(f, "scattering constant not validated for this lattice"),
            Error::PoleInDenominator => write!(f, "P_m(s) has a zero denominator factor"),
            Error::DegenerateSupport => write!(f, "support too short for two unit ramps"),
            Error::TruncationFailure { tail, head } => {
                write!(f, "weight series tail {tail:e} exceeds tolerance relative to head {head:e}")
            }
            Error::QuadratureBudgetExceeded => write!(f, "quadrature budget exceeded"),
            Error::StepSizeUnderflow => write!(f, "finite-difference step underflow"),
            Error::InsufficientSupport => write!(f, "test function support is empty"),
            Error::ProposalMismatch => write!(f, "importance weights degenerate; widen the proposal"),
            Error::BracketViolation { lower, value, upper } => {
                write!(f, "value {value:e} outside the bracket [{lower:e}, {upper:e}]")
            }
        }
    }
}
