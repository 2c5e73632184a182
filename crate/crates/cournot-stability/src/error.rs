//! Error types shared by the analysis modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed (maps to CLI exit code 2).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The inverse-demand singularity x1 + x2 <= eps was hit during a
    /// pointwise evaluation.
    #[error("singular state: x1 + x2 = {sum:e} is at or below the guard {guard:e}")]
    SingularState { sum: f64, guard: f64 },

    /// The angular diffusion coefficient q4 vanishes somewhere on the grid,
    /// so the phase process has no stationary density in this form.
    #[error("degenerate noise: min |q4| = {min_abs_q4:e} (bound {bound:e})")]
    DegenerateNoise { min_abs_q4: f64, bound: f64 },

    /// A constructed density came out negative beyond rounding.
    #[error("non-positive density: minimum value {min_value:e}")]
    NonPositiveDensity { min_value: f64 },

    /// A denominator of the backward-difference recurrence collapsed.
    #[error("backward-difference scheme breakdown at node {index}: denominator {denominator:e}")]
    SchemeBreakdown { index: usize, denominator: f64 },

    /// The classical mean-square conditions divide by a12 + b11*b12 ~ 0.
    #[error("classical mean-square conditions degenerate: a12 + b11*b12 = {denominator:e}")]
    DivisionDegenerate { denominator: f64 },

    /// No density variant met the stationary Fokker-Planck residual bound.
    #[error("stationary FPE residual {residual:e} exceeds the bound {bound:e}")]
    ResidualBound { residual: f64, bound: f64 },

    /// Ensemble statistics on paths with differing grids.
    #[error("mismatched paths: {0}")]
    MismatchedPaths(String),

    /// Two algebraically equivalent routes to the same value disagreed.
    #[error("cross-check failed ({what}): deviation {deviation:e}")]
    CrossCheckFailed { what: String, deviation: f64 },

    /// Path norm overflowed; only reachable with renormalization disabled.
    #[error("numerical overflow at step {step} (renormalization disabled)")]
    NumericalOverflow { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code contract: 2 = invalid parameters/usage, 3 = numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) => 2,
            _ => 3,
        }
    }
}
