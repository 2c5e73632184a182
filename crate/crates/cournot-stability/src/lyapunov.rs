//! Top Lyapunov exponent of the linearized SDE, by three independent routes:
//! quadrature of the phase-averaged growth rate against the stationary
//! density, the discrete λ(N) sum of the backward-difference scheme, and a
//! Monte-Carlo product estimator on the raw 2-D linear SDE.
//!
//! The Monte-Carlo route shares nothing with the polar-coordinate machinery,
//! which makes it the arbiter when the closed forms are in doubt. Its paths
//! are propagated with the strong-order-1 (Milstein) step: the plain
//! Euler–Maruyama product carries an O(h) bias in the log-growth that is
//! larger than the estimator's statistical resolution for the analytic test
//! cases.

use crate::config::{
    DEFAULT_BD_N, DEFAULT_MC_HORIZON, DEFAULT_MC_PATHS, DEFAULT_MC_STEP, DEFAULT_N_GRID,
    DEFAULT_SEED, SIGN_CHANGE_BRACKET_WIDTH, TOL_CLOSED_FORM_AGREEMENT,
};
use crate::density::{
    density_backward_difference, density_closed_form, trig_coefficients, ClosedFormVariant,
    PhaseDensity,
};
use crate::error::{Error, Result};
use crate::game::{linearize, GameParams};
use crate::linalg::{Mat2, Vec2};
use crate::quad::simpson;
use crate::rng::{derive_seed, Stream};
use crate::system::{milstein_step, LinearSystem, NoiseWiring};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaMethod {
    Quadrature,
    DiscreteScheme,
    MonteCarlo,
}

/// Method-specific context carried with each estimate.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EstimateMetadata {
    /// Quadrature: which closed-form density variant was used.
    pub density_variant: Option<ClosedFormVariant>,
    /// Quadrature, rotation-scale noise: ∫cos2θ p and ∫sin2θ p.
    pub c2: Option<f64>,
    pub s2: Option<f64>,
    /// Quadrature, rotation-scale noise: the closed-form λ rebuilt from
    /// (c2, s2); agrees with the quadrature value to 1e-8 by construction.
    pub rotation_scale_closed_form: Option<f64>,
    /// Quadrature, game-derived system: the λ expression in terms of the
    /// game constants, with D2 = c2 and E2 = s2.
    pub game_closed_form: Option<f64>,
    /// Grid intervals (quadrature) or scheme nodes (discrete).
    pub n_grid: Option<usize>,
    /// Discrete scheme: normalization convention of the half-period sum.
    pub convention: Option<&'static str>,
    /// Monte Carlo: horizon, step, and path-propagation scheme.
    pub horizon: Option<f64>,
    pub step: Option<f64>,
    pub propagation: Option<&'static str>,
}

/// One Lyapunov-exponent estimate (units 1/time).
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub method: LambdaMethod,
    /// Across-path standard error of the mean; positive only for MonteCarlo.
    pub std_error: f64,
    /// Grid size or path count.
    pub n_used: usize,
    pub metadata: EstimateMetadata,
}

/// λ = ∫ [q1 + ½(q4² − q2²)] p dθ by composite Simpson on the density grid.
///
/// For rotation-scale noise, also evaluates the closed form
/// ½(a11+a22+β²−α²) + ½(a11−a22)c2 + ½(a12+a21)s2 from the same density and
/// fails if the two routes disagree beyond 1e-8.
pub fn lambda_quadrature(sys: &LinearSystem, density: &PhaseDensity) -> Result<LyapunovEstimate> {
    let tc = trig_coefficients(sys);
    let h = density.step();
    let n = density.n_intervals();
    let vals: Vec<f64> = density
        .grid
        .iter()
        .zip(&density.values)
        .map(|(&th, &p)| tc.growth(th) * p)
        .collect();
    let value = simpson(&vals, h);

    let mut metadata = EstimateMetadata {
        density_variant: density.closed_form_variant,
        n_grid: Some(n),
        ..Default::default()
    };

    if let Some((alpha, beta)) = sys.b.as_rotation_scale() {
        let cos_vals: Vec<f64> = density
            .grid
            .iter()
            .zip(&density.values)
            .map(|(&th, &p)| (2.0 * th).cos() * p)
            .collect();
        let sin_vals: Vec<f64> = density
            .grid
            .iter()
            .zip(&density.values)
            .map(|(&th, &p)| (2.0 * th).sin() * p)
            .collect();
        let c2 = simpson(&cos_vals, h);
        let s2 = simpson(&sin_vals, h);
        let a = sys.a;
        let closed = 0.5 * (a.m11 + a.m22 + beta * beta - alpha * alpha)
            + 0.5 * (a.m11 - a.m22) * c2
            + 0.5 * (a.m12 + a.m21) * s2;
        if (closed - value).abs() > TOL_CLOSED_FORM_AGREEMENT {
            return Err(Error::CrossCheckFailed {
                what: "quadrature vs rotation-scale closed form".into(),
                deviation: (closed - value).abs(),
            });
        }
        metadata.c2 = Some(c2);
        metadata.s2 = Some(s2);
        metadata.rotation_scale_closed_form = Some(closed);
    }

    Ok(LyapunovEstimate {
        value,
        method: LambdaMethod::Quadrature,
        std_error: 0.0,
        n_used: n,
        metadata,
    })
}

/// [`lambda_quadrature`] plus the game-constant form of λ (with D2 = c2,
/// E2 = s2) cross-checked against the quadrature value.
pub fn lambda_quadrature_for_game(
    game: &GameParams,
    density: &PhaseDensity,
) -> Result<LyapunovEstimate> {
    let lin = linearize(game)?;
    let mut est = lambda_quadrature(&lin.system, density)?;
    if let (Some(c2), Some(s2)) = (est.metadata.c2, est.metadata.s2) {
        let (alpha, beta) = lin.system.b.as_rotation_scale().ok_or_else(|| {
            Error::InvalidParams("game closed form requires rotation-scale noise".into())
        })?;
        let (c1, c2g, k1, k2) = (game.c1, game.c2, game.k1, game.k2);
        let s = c1 + c2g;
        let value = -(k1 * c1 + k2 * c2g) * s + 0.5 * (beta * beta - alpha * alpha)
            - (k1 * c1 - k2 * c2g) * s * c2
            + 0.5 * (k2 - k1) * (c1 * c1 - c2g * c2g) * s2;
        if (value - est.value).abs() > TOL_CLOSED_FORM_AGREEMENT {
            return Err(Error::CrossCheckFailed {
                what: "quadrature vs game closed form".into(),
                deviation: (value - est.value).abs(),
            });
        }
        est.metadata.game_closed_form = Some(value);
    }
    Ok(est)
}

/// The discrete λ(N) = Σ_{i=0}^{N} [q1(i) + ½(q4(i)² − q2(i)²)] p(i) h on
/// the backward-difference nodes over [0, π].
///
/// Both the integrand and the density are π-periodic, so the half-period sum
/// equals the full-circle average provided the density is normalized over
/// the same half-period sum; that convention is used here and recorded.
pub fn lambda_discrete(sys: &LinearSystem, n_nodes: usize) -> Result<LyapunovEstimate> {
    let density = density_backward_difference(sys, n_nodes)?;
    let tc = trig_coefficients(sys);
    let h = std::f64::consts::PI / n_nodes as f64;
    let half = &density.values[..=n_nodes];
    let mass: f64 = half.iter().sum::<f64>() * h;
    let mut lam = 0.0;
    for (i, &p) in half.iter().enumerate() {
        lam += tc.growth(i as f64 * h) * p * h;
    }
    Ok(LyapunovEstimate {
        value: lam / mass,
        method: LambdaMethod::DiscreteScheme,
        std_error: 0.0,
        n_used: n_nodes,
        metadata: EstimateMetadata {
            n_grid: Some(n_nodes),
            convention: Some("half-period rectangle sum, density normalized over the same sum"),
            ..Default::default()
        },
    })
}

/// Monte-Carlo configuration; defaults match the CLI's documented table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McConfig {
    pub seed: u64,
    pub n_paths: usize,
    pub horizon: f64,
    pub step: f64,
    /// Per-step renormalization of the path norm. Disabling it risks
    /// overflow and exists only to demonstrate that failure mode.
    pub renormalize: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            seed: DEFAULT_SEED,
            n_paths: DEFAULT_MC_PATHS,
            horizon: DEFAULT_MC_HORIZON,
            step: DEFAULT_MC_STEP,
            renormalize: true,
        }
    }
}

/// Monte-Carlo product estimator: propagate the linear SDE path by the
/// strong-order-1 step, accumulate log‖X‖ with per-step renormalization,
/// average the per-path growth rates. Deterministic given the seed: path i
/// draws from stream i regardless of scheduling.
pub fn lambda_monte_carlo(sys: &LinearSystem, cfg: &McConfig) -> Result<LyapunovEstimate> {
    if cfg.n_paths < 2 {
        return Err(Error::InvalidParams(format!(
            "monte carlo needs n_paths >= 2, got {}",
            cfg.n_paths
        )));
    }
    if cfg.step.is_nan() || cfg.step <= 0.0 || cfg.horizon / cfg.step < 1e3 {
        return Err(Error::InvalidParams(format!(
            "monte carlo needs horizon/step >= 1e3, got {}",
            cfg.horizon / cfg.step
        )));
    }
    let n_steps = (cfg.horizon / cfg.step).round() as usize;
    let horizon = n_steps as f64 * cfg.step;

    let results: Vec<Result<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut stream = Stream::new(cfg.seed, path as u64);
            let theta0 = stream.next_uniform() * TAU;
            let mut x = Vec2::new(theta0.cos(), theta0.sin());
            let mut acc = 0.0_f64;
            for step_idx in 0..n_steps {
                let g = match sys.wiring {
                    NoiseWiring::SharedWiener => [stream.next_increment(cfg.step), 0.0],
                    NoiseWiring::IndependentWieners => [
                        stream.next_increment(cfg.step),
                        stream.next_increment(cfg.step),
                    ],
                };
                x = milstein_step(sys, x, cfg.step, g);
                if cfg.renormalize {
                    let s = x.norm();
                    acc += s.ln();
                    x = x * (1.0 / s);
                } else if !x.is_finite() || x.norm_sq() == 0.0 {
                    return Err(Error::NumericalOverflow { step: step_idx });
                }
            }
            if !cfg.renormalize {
                acc = x.norm().ln();
            }
            Ok(acc / horizon)
        })
        .collect();

    let mut estimates = Vec::with_capacity(cfg.n_paths);
    for r in results {
        estimates.push(r?);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var =
        estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64;
    let std_error = (var / estimates.len() as f64).sqrt();

    Ok(LyapunovEstimate {
        value: mean,
        method: LambdaMethod::MonteCarlo,
        std_error,
        n_used: cfg.n_paths,
        metadata: EstimateMetadata {
            horizon: Some(horizon),
            step: Some(cfg.step),
            propagation: Some("milstein-strong-order-1"),
            ..Default::default()
        },
    })
}

/// Which noise parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVar {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub lambda: Option<f64>,
    pub std_error: Option<f64>,
    /// Set when the density layer reported degenerate noise at this point.
    pub skipped: bool,
}

/// A sign change of λ(·) located by bisection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignChange {
    pub lower: f64,
    pub upper: f64,
    pub root: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub vary: SweepVar,
    pub method: LambdaMethod,
    pub points: Vec<SweepPoint>,
    pub sign_changes: Vec<SignChange>,
}

/// Settings shared by every sweep point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSettings {
    pub n_grid: usize,
    pub bd_nodes: usize,
    pub mc: McConfig,
    pub bracket_width: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            n_grid: DEFAULT_N_GRID,
            bd_nodes: DEFAULT_BD_N,
            mc: McConfig::default(),
            bracket_width: SIGN_CHANGE_BRACKET_WIDTH,
        }
    }
}

fn vary_params(base: &GameParams, vary: SweepVar, value: f64) -> Result<GameParams> {
    let (alpha, beta) = base.b.as_rotation_scale().ok_or_else(|| {
        Error::InvalidParams("sweeps need rotation-scale noise b = αI + βJ".into())
    })?;
    let (alpha, beta) = match vary {
        SweepVar::Alpha => (value, beta),
        SweepVar::Beta => (alpha, value),
    };
    GameParams::new(
        base.c1,
        base.c2,
        base.k1,
        base.k2,
        Mat2::rotation_scale(alpha, beta),
    )
}

fn lambda_at(
    base: &GameParams,
    vary: SweepVar,
    value: f64,
    method: LambdaMethod,
    s: &SweepSettings,
    index: u64,
) -> Result<LyapunovEstimate> {
    let p = vary_params(base, vary, value)?;
    let lin = linearize(&p)?;
    match method {
        LambdaMethod::Quadrature => {
            let d = density_closed_form(&lin.system, s.n_grid)?;
            lambda_quadrature_for_game(&p, &d)
        }
        LambdaMethod::DiscreteScheme => lambda_discrete(&lin.system, s.bd_nodes),
        LambdaMethod::MonteCarlo => {
            let cfg = McConfig {
                seed: derive_seed(s.mc.seed, index),
                ..s.mc
            };
            lambda_monte_carlo(&lin.system, &cfg)
        }
    }
}

/// Evaluates λ at equally spaced parameter values and brackets each sign
/// change of the curve by bisection (always on the quadrature λ, which is
/// smooth and cheap) to the configured width.
///
/// Degenerate-noise points (for example β = 0 inside a beta sweep) are
/// flagged and skipped rather than failing the sweep.
pub fn lambda_sweep(
    base: &GameParams,
    vary: SweepVar,
    range: (f64, f64),
    n_points: usize,
    method: LambdaMethod,
    settings: &SweepSettings,
) -> Result<SweepTable> {
    if n_points == 0 {
        return Err(Error::InvalidParams(
            "sweep needs at least one point".into(),
        ));
    }
    vary_params(base, vary, range.0)?; // validates the noise form up front

    let values: Vec<f64> = if n_points == 1 || range.0 == range.1 {
        vec![range.0]
    } else {
        let step = (range.1 - range.0) / (n_points - 1) as f64;
        (0..n_points).map(|i| range.0 + i as f64 * step).collect()
    };

    let evaluated: Vec<Result<Option<(f64, f64)>>> = values
        .par_iter()
        .enumerate()
        .map(
            |(i, &v)| match lambda_at(base, vary, v, method, settings, i as u64) {
                Ok(est) => Ok(Some((est.value, est.std_error))),
                Err(Error::DegenerateNoise { .. }) => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect();

    let mut points = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(evaluated) {
        match r? {
            Some((lam, se)) => points.push(SweepPoint {
                param: *v,
                lambda: Some(lam),
                std_error: if se > 0.0 { Some(se) } else { None },
                skipped: false,
            }),
            None => points.push(SweepPoint {
                param: *v,
                lambda: None,
                std_error: None,
                skipped: true,
            }),
        }
    }

    // Bracket sign changes between adjacent successful points.
    let quad_lambda = |x: f64| -> Result<f64> {
        let p = vary_params(base, vary, x)?;
        let lin = linearize(&p)?;
        let d = density_closed_form(&lin.system, settings.n_grid)?;
        Ok(lambda_quadrature(&lin.system, &d)?.value)
    };
    let mut sign_changes = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (Some(la), Some(lb)) = (a.lambda, b.lambda) else {
            continue;
        };
        if la == 0.0 || la * lb >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (a.param, b.param);
        // bisection on the quadrature curve, which may differ slightly from
        // the sweep method's values; re-anchor the endpoint signs first
        let mut flo = quad_lambda(lo)?;
        let fhi = quad_lambda(hi)?;
        if flo * fhi > 0.0 {
            // methods disagree about the crossing; report the grid bracket as is
            sign_changes.push(SignChange {
                lower: lo,
                upper: hi,
                root: 0.5 * (lo + hi),
            });
            continue;
        }
        while hi - lo > settings.bracket_width {
            let mid = 0.5 * (lo + hi);
            let fm = quad_lambda(mid)?;
            if flo * fm <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        sign_changes.push(SignChange {
            lower: lo,
            upper: hi,
            root: 0.5 * (lo + hi),
        });
    }

    Ok(SweepTable {
        vary,
        method,
        points,
        sign_changes,
    })
}
