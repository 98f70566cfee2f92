use std::fmt;

/// Crate-wide error type.
///
/// Variants split into user-facing input problems (inadmissible parameters,
/// domain violations, boundary-regime refusals) and numeric failures
/// (gamma poles, series nonconvergence, quadrature budget exhaustion).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was NaN or infinite, or a config field was out of range.
    InvalidInput(String),
    /// (alpha, rho) lies outside the admissible set; `detail` names the
    /// violated branch.
    Inadmissible { alpha: f64, rho: f64, detail: String },
    /// An operation was called outside its mathematical domain.
    Domain(String),
    /// The gain exponent sits exactly on a regime boundary, where neither
    /// the finite-value formulas nor the infinite-value classification
    /// applies; callers must perturb the exponent.
    BoundaryRegime { r: f64, lower: f64, upper: f64 },
    /// A gamma evaluation was requested at or next to a nonpositive integer.
    GammaPole { re: f64, im: f64 },
    /// A series failed to reach tolerance within its iteration budget.
    NonConvergence { context: &'static str, detail: String },
    /// Adaptive quadrature exhausted its refinement budget; carries the best
    /// estimate so callers can decide whether it is still usable.
    QuadratureBudget {
        best: f64,
        error_estimate: f64,
        evaluations: u64,
    },
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::GammaPole { .. } | Error::NonConvergence { .. } | Error::QuadratureBudget { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Inadmissible { alpha, rho, detail } => write!(
                f,
                "inadmissible stable parameters (alpha={alpha}, rho={rho}): {detail}"
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::BoundaryRegime { r, lower, upper } => write!(
                f,
                "gain exponent r={r} lies exactly on a regime boundary \
                 (finite window is ({lower}, 0) U (0, {upper})); perturb r"
            ),
            Error::GammaPole { re, im } => {
                write!(f, "gamma argument {re}+{im}i is at or near a nonpositive integer pole")
            }
            Error::NonConvergence { context, detail } => {
                write!(f, "{context} failed to converge: {detail}")
            }
            Error::QuadratureBudget {
                best,
                error_estimate,
                evaluations,
            } => write!(
                f,
                "quadrature budget exhausted after {evaluations} evaluations \
                 (best estimate {best:e}, error estimate {error_estimate:e})"
            ),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
