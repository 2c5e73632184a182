//! Stationary probability density of the angular process.
//!
//! Writing the linearized solution in polar coordinates gives the angle SDE
//! dθ = (q3(θ) − q2(θ)q4(θ)) dt + q4(θ) dw with the trigonometric
//! coefficients of [`TrigCoefficients`]. Its stationary Fokker–Planck
//! equation, integrated once, is the first-order problem
//!
//! ```text
//! ½ q4² p' + (−q3 + q2 q4 + q4 q4') p = p0
//! ```
//!
//! with the flux constant p0 and p(0) fixed by 2π-periodicity and
//! normalization. Three independent constructions are provided: the closed
//! form (integrating factor, evaluated in log space so stiff exponents never
//! overflow), the backward-difference recurrence, and a Monte-Carlo angle
//! histogram. The stationary-FPE residual is the acceptance authority: a
//! closed-form variant is only returned if its residual passes, and the
//! variant actually used is recorded in the result.

use crate::config::{
    EPS_Q4, EPS_SCHEME_DENOM, TOL_DENSITY_NEGATIVE, TOL_FPE_RESIDUAL, TOL_NORMALIZATION,
};
use crate::error::{Error, Result};
use crate::quad::{cumulative_simpson, log_add_exp, simpson};
use crate::rng::Stream;
use crate::system::LinearSystem;
use serde::Serialize;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// The trigonometric coefficient functions of the polar decomposition,
/// bound to one linear system. All of them are π-periodic.
#[derive(Debug, Clone, Copy)]
pub struct TrigCoefficients {
    sys: LinearSystem,
}

impl TrigCoefficients {
    /// Structural period of every coefficient.
    pub const PERIOD: f64 = PI;

    pub fn q1(&self, th: f64) -> f64 {
        let (s, c) = th.sin_cos();
        let a = self.sys.a;
        a.m11 * c * c + (a.m12 + a.m21) * c * s + a.m22 * s * s
    }

    pub fn q2(&self, th: f64) -> f64 {
        let (s, c) = th.sin_cos();
        let b = self.sys.b;
        b.m11 * c * c + (b.m12 + b.m21) * c * s + b.m22 * s * s
    }

    pub fn q3(&self, th: f64) -> f64 {
        let (s, c) = th.sin_cos();
        let a = self.sys.a;
        a.m21 * c * c + (a.m22 - a.m11) * c * s - a.m12 * s * s
    }

    pub fn q4(&self, th: f64) -> f64 {
        let (s, c) = th.sin_cos();
        let b = self.sys.b;
        b.m21 * c * c + (b.m22 - b.m11) * c * s - b.m12 * s * s
    }

    /// q5 as printed: −(b12+b21) sin 2θ − (b22−b11) cos 2θ.
    pub fn q5_printed(&self, th: f64) -> f64 {
        let (s2, c2) = (2.0 * th).sin_cos();
        let b = self.sys.b;
        -(b.m12 + b.m21) * s2 - (b.m22 - b.m11) * c2
    }

    /// The true derivative dq4/dθ = −(b12+b21) sin 2θ + (b22−b11) cos 2θ,
    /// which is what the stationary equation actually multiplies q4 by.
    pub fn q4_prime(&self, th: f64) -> f64 {
        let (s2, c2) = (2.0 * th).sin_cos();
        let b = self.sys.b;
        -(b.m12 + b.m21) * s2 + (b.m22 - b.m11) * c2
    }

    /// Drift of the angle process, q3 − q2 q4.
    pub fn angle_drift(&self, th: f64) -> f64 {
        self.q3(th) - self.q2(th) * self.q4(th)
    }

    /// Growth-rate integrand q1 + ½(q4² − q2²).
    pub fn growth(&self, th: f64) -> f64 {
        let q4 = self.q4(th);
        let q2 = self.q2(th);
        self.q1(th) + 0.5 * (q4 * q4 - q2 * q2)
    }
}

pub fn trig_coefficients(sys: &LinearSystem) -> TrigCoefficients {
    TrigCoefficients { sys: *sys }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DensityMethod {
    ClosedForm,
    BackwardDifference,
    McHistogram,
}

/// Which closed-form solution passed the residual gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedFormVariant {
    /// The original closed form verbatim, with the printed q5 inside D(θ).
    PaperLiteral,
    /// The integrating-factor solution of the stationary equation itself
    /// (D without the q5 term); substituted when the literal formula fails
    /// the residual bound.
    DerivedStationary,
}

/// A discretized probability density of the angle over the closed grid
/// [0, 2π], with its normalization and stationary-FPE residual on record.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseDensity {
    /// n+1 equally spaced angles: `grid[0] = 0`, `grid[n] = 2π`.
    pub grid: Vec<f64>,
    /// Nonnegative values with `values[n] = values[0]`.
    pub values: Vec<f64>,
    /// |∫ p dθ − 1| under composite Simpson.
    pub normalization_error: f64,
    /// Max-norm residual of the stationary Fokker–Planck equation.
    pub fpe_residual: f64,
    pub method: DensityMethod,
    /// Closed form only: the variant that passed the residual gate.
    pub closed_form_variant: Option<ClosedFormVariant>,
    /// Backward difference only: the periodicity system was singular and the
    /// p0 = 0 particular solution was used instead.
    pub periodicity_fallback: bool,
}

impl PhaseDensity {
    pub fn n_intervals(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Max deviation from π-shift symmetry, scaled by max(1, sup p).
    pub fn pi_shift_asymmetry(&self) -> f64 {
        let n = self.n_intervals();
        let half = n / 2;
        let scale = self.values.iter().cloned().fold(1.0_f64, f64::max);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let k = (j + half) % n;
            worst = worst.max((self.values[j] - self.values[k]).abs());
        }
        worst / scale
    }
}

fn uniform_grid(n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    (0..=n).map(|j| j as f64 * h).collect()
}

fn check_q4(tc: &TrigCoefficients, n: usize) -> Result<()> {
    let h = TAU / n as f64;
    let mut min_abs = f64::INFINITY;
    for j in 0..n {
        min_abs = min_abs.min(tc.q4(j as f64 * h).abs());
    }
    if min_abs <= EPS_Q4 {
        return Err(Error::DegenerateNoise {
            min_abs_q4: min_abs,
            bound: EPS_Q4,
        });
    }
    Ok(())
}

fn check_grid_arg(n_grid: usize) -> Result<()> {
    if n_grid < 64 || !n_grid.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "density grid must be an even interval count >= 64, got {n_grid}"
        )));
    }
    Ok(())
}

/// Stationary density by the closed form.
///
/// Tries the literal published formula first; if its FPE residual exceeds the
/// bound (possible for general noise, where the printed q5 disagrees with
/// dq4/dθ), substitutes the directly derived stationary solution and
/// enforces the bound on that. The whole construction runs in log space:
/// only the final normalized density is exponentiated, so strongly drifting
/// exponents (small |β|) cannot overflow.
pub fn density_closed_form(sys: &LinearSystem, n_grid: usize) -> Result<PhaseDensity> {
    check_grid_arg(n_grid)?;
    let tc = trig_coefficients(sys);
    check_q4(&tc, n_grid)?;

    let literal = closed_form_variant(&tc, sys, n_grid, ClosedFormVariant::PaperLiteral)?;
    if literal.fpe_residual < TOL_FPE_RESIDUAL {
        return Ok(literal);
    }
    let derived = closed_form_variant(&tc, sys, n_grid, ClosedFormVariant::DerivedStationary)?;
    if derived.fpe_residual < TOL_FPE_RESIDUAL {
        return Ok(derived);
    }
    Err(Error::ResidualBound {
        residual: derived.fpe_residual,
        bound: TOL_FPE_RESIDUAL,
    })
}

fn closed_form_variant(
    tc: &TrigCoefficients,
    sys: &LinearSystem,
    n: usize,
    variant: ClosedFormVariant,
) -> Result<PhaseDensity> {
    let psi = |th: f64| {
        let q4 = tc.q4(th);
        let base = tc.q3(th) - tc.q2(th) * q4;
        let extra = match variant {
            ClosedFormVariant::PaperLiteral => q4 * tc.q5_printed(th),
            ClosedFormVariant::DerivedStationary => 0.0,
        };
        2.0 * (base - extra) / (q4 * q4)
    };

    // log D at half-step resolution so each grid interval has its midpoint
    let c = cumulative_simpson(psi, 0.0, TAU, 2 * n);
    let w = |j: usize| -c[j]; // index in half steps
    let h = TAU / n as f64;

    // forward and backward log integrals of D over the grid intervals
    let mut log_fwd = vec![f64::NEG_INFINITY; n + 1];
    let mut log_bwd = vec![f64::NEG_INFINITY; n + 1];
    let log_h6 = (h / 6.0).ln();
    let ln4 = 4.0_f64.ln();
    let mut terms = Vec::with_capacity(n);
    for j in 0..n {
        let t = log_h6 + log_add_exp(log_add_exp(w(2 * j), ln4 + w(2 * j + 1)), w(2 * j + 2));
        terms.push(t);
    }
    for j in 0..n {
        log_fwd[j + 1] = log_add_exp(log_fwd[j], terms[j]);
    }
    for j in (0..n).rev() {
        log_bwd[j] = log_add_exp(log_bwd[j + 1], terms[j]);
    }

    // T(θ) = log(1 + η ∫_0^θ D du), η = (D(2π) − 1)/∫_0^{2π} D du
    let w_tau = w(2 * n);
    let log_total = log_fwd[n];
    let mut log_p = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = if w_tau >= 0.0 {
            // 1 + ηI >= 1: softplus of log(ηI)
            let log_eta_num = if w_tau > 36.0 {
                w_tau
            } else if w_tau > 0.0 {
                w_tau.exp_m1().ln()
            } else {
                f64::NEG_INFINITY
            };
            let a = log_eta_num + log_fwd[j] - log_total;
            if a > 36.0 {
                a
            } else {
                a.exp().ln_1p()
            }
        } else {
            // 1 + ηI = (tail + D(2π)·head) / total, all positive
            log_add_exp(log_bwd[j], w_tau + log_fwd[j]) - log_total
        };
        let th = j as f64 * h;
        let q4 = tc.q4(th);
        log_p.push(t - w(2 * j) - (q4 * q4).ln());
    }

    let m = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut values: Vec<f64> = log_p.iter().map(|&lp| (lp - m).exp()).collect();
    values[n] = values[0];
    let z = simpson(&values, h);
    for v in values.iter_mut() {
        *v /= z;
    }
    let normalization_error = (simpson(&values, h) - 1.0).abs();
    debug_assert!(normalization_error < TOL_NORMALIZATION);

    let mut density = PhaseDensity {
        grid: uniform_grid(n),
        values,
        normalization_error,
        fpe_residual: f64::NAN,
        method: DensityMethod::ClosedForm,
        closed_form_variant: Some(variant),
        periodicity_fallback: false,
    };
    density.fpe_residual = fpe_residual(sys, &density);
    Ok(density)
}

/// Pointwise residual of the stationary Fokker–Planck equation
/// d/dθ[(q3 − q2q4)p] − ½ d²/dθ²[q4² p] at the first n grid points, using
/// fourth-order central differences with periodic wraparound.
pub fn fpe_residual_profile(sys: &LinearSystem, p: &PhaseDensity) -> Vec<f64> {
    let n = p.n_intervals();
    assert!(n >= 64, "residual stencil needs n_grid >= 64, got {n}");
    let tc = trig_coefficients(sys);
    let h = p.step();
    let flux: Vec<f64> = (0..n)
        .map(|j| tc.angle_drift(p.grid[j]) * p.values[j])
        .collect();
    let diff: Vec<f64> = (0..n)
        .map(|j| {
            let q4 = tc.q4(p.grid[j]);
            q4 * q4 * p.values[j]
        })
        .collect();
    let at = |f: &Vec<f64>, i: isize| f[i.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .map(|j| {
            let d1 = (-at(&flux, j + 2) + 8.0 * at(&flux, j + 1) - 8.0 * at(&flux, j - 1)
                + at(&flux, j - 2))
                / (12.0 * h);
            let d2 = (-at(&diff, j + 2) + 16.0 * at(&diff, j + 1) - 30.0 * at(&diff, j)
                + 16.0 * at(&diff, j - 1)
                - at(&diff, j - 2))
                / (12.0 * h * h);
            d1 - 0.5 * d2
        })
        .collect()
}

/// Max-norm of [`fpe_residual_profile`].
pub fn fpe_residual(sys: &LinearSystem, p: &PhaseDensity) -> f64 {
    fpe_residual_profile(sys, p)
        .iter()
        .fold(0.0, |acc, r| acc.max(r.abs()))
}

/// Stationary density by the backward-difference recurrence
/// p(i) = (p0 + q4(i)² p(i−1)/(2h)) F(i) on [0, π], extended π-periodically.
///
/// The recurrence is linear in the flux constant p0 and the seed p(0); it is
/// run with the basis values (1, 0) and (0, 1) and the combination is fixed
/// by π-periodicity p(N) = p(0), then normalized. A singular periodicity
/// system falls back to the p0 = 0 particular solution and flags the result.
pub fn density_backward_difference(sys: &LinearSystem, n_nodes: usize) -> Result<PhaseDensity> {
    if n_nodes < 16 {
        return Err(Error::InvalidParams(format!(
            "backward-difference scheme needs N >= 16, got {n_nodes}"
        )));
    }
    let n = n_nodes;
    let tc = trig_coefficients(sys);
    check_q4(&tc, 2 * n)?;

    let h = PI / n as f64;
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    v[0] = 1.0;
    for i in 1..=n {
        let th = i as f64 * h;
        let q4 = tc.q4(th);
        let q4sq = q4 * q4;
        let e = -tc.q3(th) + tc.q2(th) * q4 + q4 * tc.q4_prime(th);
        let den = 2.0 * h * e + q4sq;
        if den.abs() <= EPS_SCHEME_DENOM {
            return Err(Error::SchemeBreakdown {
                index: i,
                denominator: den,
            });
        }
        let f = 2.0 * h / den;
        u[i] = (1.0 + q4sq * u[i - 1] / (2.0 * h)) * f;
        v[i] = (q4sq * v[i - 1] / (2.0 * h)) * f;
        if !u[i].is_finite() || !v[i].is_finite() {
            return Err(Error::SchemeBreakdown {
                index: i,
                denominator: den,
            });
        }
    }

    // periodicity: p0 u(N) + p(0) (v(N) − 1) = 0
    let scale = u[n].abs().max(v[n].abs()).max(1.0);
    let (p0, pseed, fallback) = if (u[n].abs() + (v[n] - 1.0).abs()) < 1e-12 * scale {
        (0.0, 1.0, true)
    } else {
        (1.0 - v[n], u[n], false)
    };

    let mut half: Vec<f64> = (0..=n).map(|i| p0 * u[i] + pseed * v[i]).collect();
    let total: f64 = half.iter().sum();
    if total < 0.0 {
        for x in half.iter_mut() {
            *x = -*x;
        }
    } else if total == 0.0 {
        return Err(Error::NonPositiveDensity { min_value: 0.0 });
    }

    // extend to [0, 2π) by π-periodicity; p(N) = p(0) by construction
    let mut values: Vec<f64> = Vec::with_capacity(2 * n + 1);
    values.extend_from_slice(&half);
    values.extend_from_slice(&half[1..]);
    let z = simpson(&values, h);
    for x in values.iter_mut() {
        *x /= z;
    }
    let min_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup = values.iter().cloned().fold(0.0_f64, f64::max);
    if min_value < -TOL_DENSITY_NEGATIVE * sup.max(1.0) {
        return Err(Error::NonPositiveDensity { min_value });
    }
    for x in values.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let normalization_error = (simpson(&values, h) - 1.0).abs();

    let mut density = PhaseDensity {
        grid: uniform_grid(2 * n),
        values,
        normalization_error,
        fpe_residual: f64::NAN,
        method: DensityMethod::BackwardDifference,
        closed_form_variant: None,
        periodicity_fallback: fallback,
    };
    // the fourth-order stencil needs 64 intervals; tiny grids record NaN
    if 2 * n >= 64 {
        density.fpe_residual = fpe_residual(sys, &density);
    }
    Ok(density)
}

/// Monte-Carlo oracle: Euler–Maruyama on the angle SDE, burn-in discarded,
/// retained steps binned over [0, 2π). Deterministic given the seed. The
/// value at grid point j is the occupancy of bin [θ_j, θ_{j+1}).
pub fn mc_angle_histogram(
    sys: &LinearSystem,
    seed: u64,
    n_samples: usize,
    burn_in_time: f64,
    step_h: f64,
    n_bins: usize,
) -> Result<PhaseDensity> {
    check_grid_arg(n_bins)?;
    if step_h.is_nan() || step_h <= 0.0 || n_samples == 0 {
        return Err(Error::InvalidParams(
            "histogram needs step_h > 0 and n_samples > 0".into(),
        ));
    }
    let tc = trig_coefficients(sys);
    check_q4(&tc, n_bins.max(256))?;

    let mut stream = Stream::new(seed, 0);
    let mut theta = 0.0_f64;
    let burn_steps = (burn_in_time / step_h).ceil() as usize;
    for _ in 0..burn_steps {
        theta += tc.angle_drift(theta) * step_h + tc.q4(theta) * stream.next_increment(step_h);
    }
    let hg = TAU / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for _ in 0..n_samples {
        theta += tc.angle_drift(theta) * step_h + tc.q4(theta) * stream.next_increment(step_h);
        let wrapped = theta.rem_euclid(TAU);
        let mut idx = (wrapped / hg) as usize;
        if idx >= n_bins {
            idx = n_bins - 1;
        }
        counts[idx] += 1;
    }
    let norm = 1.0 / (n_samples as f64 * hg);
    let mut values: Vec<f64> = counts.iter().map(|&c| c as f64 * norm).collect();
    values.push(values[0]);
    let normalization_error = (simpson(&values, hg) - 1.0).abs();

    let mut density = PhaseDensity {
        grid: uniform_grid(n_bins),
        values,
        normalization_error,
        fpe_residual: f64::NAN,
        method: DensityMethod::McHistogram,
        closed_form_variant: None,
        periodicity_fallback: false,
    };
    density.fpe_residual = fpe_residual(sys, &density);
    Ok(density)
}
