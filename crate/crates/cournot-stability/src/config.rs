//! Central table of default numeric settings and validation tolerances.
//!
//! Every bound the library enforces is defined here once; the CLI echoes the
//! effective values into its outputs so results are replayable.

/// Guard on x1 + x2 before evaluating the inverse demand 1/x. The drift blows
/// up at the origin; evaluation fails loudly instead of emitting NaN.
pub const EPS_STATE: f64 = 1e-9;

/// Lower bound on min |q4(theta)| for the angular diffusion; below it the
/// phase SDE is treated as degenerate noise.
pub const EPS_Q4: f64 = 1e-8;

/// Lower bound on the backward-difference denominator 2h(−q3+q2q4+q4q5)+q4².
pub const EPS_SCHEME_DENOM: f64 = 1e-12;

/// Grid intervals for closed-form densities and quadrature (even).
pub const DEFAULT_N_GRID: usize = 2048;

/// Nodes of the backward-difference scheme on [0, π].
pub const DEFAULT_BD_N: usize = 2000;

/// Monte-Carlo Lyapunov estimator defaults.
pub const DEFAULT_MC_PATHS: usize = 200;
pub const DEFAULT_MC_HORIZON: f64 = 200.0;
pub const DEFAULT_MC_STEP: f64 = 1e-3;

/// Base seed used by the CLI when none is supplied.
pub const DEFAULT_SEED: u64 = 1;

/// Angle-histogram defaults: bins, retained samples, burn-in time, step.
/// The step is coarser than the path integrators use: histogram accuracy is
/// limited by sample decorrelation (the angle needs ~(2π)²/q4² time units to
/// mix), not by step bias, so a larger step buys far more effective samples.
pub const DEFAULT_HIST_BINS: usize = 256;
pub const DEFAULT_HIST_SAMPLES: usize = 1_000_000;
pub const DEFAULT_HIST_BURN_IN: f64 = 10.0;
pub const DEFAULT_HIST_STEP: f64 = 1e-2;

/// Sweep defaults.
pub const DEFAULT_SWEEP_POINTS: usize = 61;
pub const SIGN_CHANGE_BRACKET_WIDTH: f64 = 1e-3;

/// Acceptance bound on |∫p dθ − 1| for constructed densities.
pub const TOL_NORMALIZATION: f64 = 1e-8;

/// Acceptance bound on the stationary-FPE residual of a closed-form density.
pub const TOL_FPE_RESIDUAL: f64 = 1e-4;

/// Values this far below zero fail the nonnegativity check; smaller dips are
/// clamped to zero.
pub const TOL_DENSITY_NEGATIVE: f64 = 1e-10;

/// Bound on the π-shift asymmetry of solver densities.
pub const TOL_PI_SHIFT: f64 = 1e-6;

/// Agreement bound between the quadrature λ and its rotation-scale closed form.
pub const TOL_CLOSED_FORM_AGREEMENT: f64 = 1e-8;

/// Cross-method λ agreement floor: max(this, 3·std_error).
pub const TOL_LAMBDA_CROSS_METHOD: f64 = 1e-2;

/// Relative tolerance on drift vanishing at the stationary state.
pub const TOL_STATIONARY_DRIFT: f64 = 1e-12;

/// Absolute per-entry bound when checking A against the central
/// finite-difference Jacobian of the drift.
pub const TOL_JACOBIAN_FD: f64 = 1e-6;

/// Environment variable capping worker parallelism; absent means auto.
pub const THREADS_ENV_VAR: &str = "COURNOT_STABILITY_THREADS";

#[cfg(test)]
mod tests {
    #![allow(clippy::assertions_on_constants)]
    use super::*;

    #[test]
    fn guards_are_positive_and_ordered() {
        assert!(EPS_SCHEME_DENOM < EPS_Q4);
        assert!(EPS_Q4 < EPS_STATE * 1e2);
        assert!(TOL_NORMALIZATION < TOL_FPE_RESIDUAL);
        assert!(TOL_STATIONARY_DRIFT < TOL_JACOBIAN_FD);
    }

    #[test]
    fn grid_defaults_are_even() {
        assert_eq!(DEFAULT_N_GRID % 2, 0);
        assert_eq!(DEFAULT_HIST_BINS % 2, 0);
    }
}
