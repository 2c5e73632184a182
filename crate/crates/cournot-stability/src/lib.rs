//! Stochastic stability analysis for the Cournot duopoly SDE and general
//! 2-D linear SDEs.
//!
//! The library answers one question three independent ways: is the
//! stationary state of the stochastic game stable? It computes
//!
//! * the **top Lyapunov exponent** of the linearized system — by quadrature
//!   of the phase-averaged growth rate against the stationary angle density,
//!   by a backward-difference discretization of the stationary
//!   Fokker–Planck equation, and by Monte-Carlo log-growth of simulated
//!   paths ([`lyapunov`]);
//! * the **stationary phase density** itself, residual-checked against the
//!   Fokker–Planck equation ([`density`]);
//! * **mean-square certificates** from quadratic Lyapunov functions
//!   ([`meansquare`]);
//! * **simulated orbits** of the full nonlinear game ([`sim`]).
//!
//! Start from [`game::GameParams`] for the duopoly model, or build a raw
//! [`system::LinearSystem`] directly. The `examples/` directory has one
//! runnable program per capability; the `cournot-stability` binary exposes
//! the same analyses as CLI subcommands emitting CSV/JSON.

pub mod cli;
pub mod config;
pub mod density;
pub mod error;
pub mod game;
pub mod linalg;
pub mod lyapunov;
pub mod meansquare;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod system;

pub use density::{
    density_backward_difference, density_closed_form, fpe_residual, fpe_residual_profile,
    mc_angle_histogram, trig_coefficients, ClosedFormVariant, DensityMethod, PhaseDensity,
    TrigCoefficients,
};
pub use error::{Error, Result};
pub use game::{
    characteristic_roots, diffusion, drift, gamma_offsets, linearize, stationary_state,
    CharacteristicRoots, GameParams, Linearization, StationaryState,
};
pub use linalg::{Mat2, Vec2};
pub use lyapunov::{
    lambda_discrete, lambda_monte_carlo, lambda_quadrature, lambda_quadrature_for_game,
    lambda_sweep, LambdaMethod, LyapunovEstimate, McConfig, SignChange, SweepPoint, SweepSettings,
    SweepTable, SweepVar,
};
pub use meansquare::{
    definiteness_certificate, lv_coefficients, mc_second_moment_check, mean_square_report,
    paper_conditions, DefinitenessCertificate, McMomentCheck, MeanSquareReport, PaperConditions,
    QuadraticLyapunov, Verdict,
};
pub use sim::{
    ensemble_stats, euler_maruyama, euler_maruyama_driven, paper_taylor2, wiener_increments,
    EnsembleSeries, Observable, Scheme, SdePath, Truncation, TruncationReason, WienerIncrements,
    WienerSpec, Wiring,
};
pub use system::{LinearSystem, NoiseWiring};
