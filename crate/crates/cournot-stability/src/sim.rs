//! Path simulation of the full nonlinear game SDE: Wiener increment
//! generation, the Euler–Maruyama reference integrator, and a second-order
//! scheme, sharing increments so runs are pathwise comparable.
//!
//! Paths that leave the open positive quadrant (or hit the x1 + x2
//! singularity guard) are truncated and carry an explicit marker; states are
//! never silently clamped or allowed to go non-finite.

use crate::error::{Error, Result};
use crate::game::{diffusion, drift, gamma_offsets, stationary_state, GameParams};
use crate::linalg::Vec2;
use crate::rng::Stream;
use serde::Serialize;

/// How to draw the driving increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wiring {
    /// One Wiener process drives both components (the game equation's form).
    SharedWiener,
    /// Each component has its own independent Wiener process.
    IndependentWieners,
}

/// Deterministic specification of a Wiener increment sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WienerSpec {
    pub seed: u64,
    pub step_h: f64,
    pub n_steps: usize,
    pub wiring: Wiring,
}

/// The generated increments, one sequence per channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WienerIncrements {
    Shared(Vec<f64>),
    Independent(Vec<f64>, Vec<f64>),
}

impl WienerIncrements {
    pub fn len(&self) -> usize {
        match self {
            WienerIncrements::Shared(v) => v.len(),
            WienerIncrements::Independent(v, _) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Increments (G1, G2) seen by the two components at step n.
    pub fn at(&self, n: usize) -> (f64, f64) {
        match self {
            WienerIncrements::Shared(v) => (v[n], v[n]),
            WienerIncrements::Independent(v, w) => (v[n], w[n]),
        }
    }

    pub fn truncate(&mut self, n: usize) {
        match self {
            WienerIncrements::Shared(v) => v.truncate(n),
            WienerIncrements::Independent(v, w) => {
                v.truncate(n);
                w.truncate(n);
            }
        }
    }
}

/// i.i.d. Gaussian(0, h) increments G(n) = w((n+1)h) − w(nh), deterministic
/// given the seed; channel c draws from stream c.
pub fn wiener_increments(spec: &WienerSpec) -> Result<WienerIncrements> {
    if !spec.step_h.is_finite() || spec.step_h <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "step_h must be positive, got {}",
            spec.step_h
        )));
    }
    let draw = |stream_id: u64| -> Vec<f64> {
        let mut s = Stream::new(spec.seed, stream_id);
        (0..spec.n_steps)
            .map(|_| s.next_increment(spec.step_h))
            .collect()
    };
    Ok(match spec.wiring {
        Wiring::SharedWiener => WienerIncrements::Shared(draw(0)),
        Wiring::IndependentWieners => WienerIncrements::Independent(draw(0), draw(1)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    EulerMaruyama,
    PaperTaylor2,
}

/// Why a path stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TruncationReason {
    LeftPositiveQuadrant,
    SingularSum,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    /// Index of the step whose result was rejected; the path keeps the
    /// states 0..=step.
    pub step: usize,
    pub reason: TruncationReason,
}

/// A recorded trajectory. For truncated paths the kept increments are the
/// ones actually consumed, so |states| = |times| = |increments| + 1 always.
#[derive(Debug, Clone, Serialize)]
pub struct SdePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec2>,
    pub increments: WienerIncrements,
    pub scheme: Scheme,
    pub params: GameParams,
    pub seed: u64,
    pub truncation: Option<Truncation>,
}

impl SdePath {
    pub fn final_state(&self) -> Vec2 {
        *self
            .states
            .last()
            .expect("paths have at least the initial state")
    }
}

fn validate_initial(p: &GameParams, x: Vec2) -> Result<()> {
    if !(x.x > 0.0 && x.y > 0.0) || x.x + x.y <= p.eps_state || !x.is_finite() {
        return Err(Error::InvalidParams(format!(
            "initial state must lie in the open positive quadrant with x1+x2 > {:e}, got ({}, {})",
            p.eps_state, x.x, x.y
        )));
    }
    Ok(())
}

fn classify(p: &GameParams, x: Vec2) -> Option<TruncationReason> {
    if !x.is_finite() {
        Some(TruncationReason::NonFinite)
    } else if x.x + x.y <= p.eps_state {
        Some(TruncationReason::SingularSum)
    } else if x.x <= 0.0 || x.y <= 0.0 {
        Some(TruncationReason::LeftPositiveQuadrant)
    } else {
        None
    }
}

fn integrate<F>(
    p: &GameParams,
    x_init: Vec2,
    step_h: f64,
    mut increments: WienerIncrements,
    seed: u64,
    scheme: Scheme,
    step: F,
) -> Result<SdePath>
where
    F: Fn(&GameParams, Vec2, f64, (f64, f64)) -> Vec2,
{
    p.validate()?;
    validate_initial(p, x_init)?;
    let n_steps = increments.len();
    let h = step_h;
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut times = Vec::with_capacity(n_steps + 1);
    states.push(x_init);
    times.push(0.0);
    let mut truncation = None;
    for n in 0..n_steps {
        let x = *states.last().unwrap();
        let next = step(p, x, h, increments.at(n));
        if let Some(reason) = classify(p, next) {
            truncation = Some(Truncation {
                step: n + 1,
                reason,
            });
            increments.truncate(n);
            break;
        }
        states.push(next);
        times.push((n + 1) as f64 * h);
    }
    Ok(SdePath {
        times,
        states,
        increments,
        scheme,
        params: *p,
        seed,
        truncation,
    })
}

fn em_step_fn(p: &GameParams, x: Vec2, h: f64, (g1, g2): (f64, f64)) -> Vec2 {
    let d = drift(p, x).expect("state validated before stepping");
    let g = diffusion(p, x).expect("state validated before stepping");
    Vec2::new(x.x + h * d.x + g.x * g1, x.y + h * d.y + g.y * g2)
}

/// Reference integrator: x(n+1) = x(n) + h·drift + diffusion·G(n).
pub fn euler_maruyama(p: &GameParams, x_init: Vec2, spec: &WienerSpec) -> Result<SdePath> {
    let increments = wiener_increments(spec)?;
    integrate(
        p,
        x_init,
        spec.step_h,
        increments,
        spec.seed,
        Scheme::EulerMaruyama,
        em_step_fn,
    )
}

/// Euler–Maruyama driven by caller-supplied increments (for coupled
/// multi-resolution studies); `seed` is recorded as path metadata only.
pub fn euler_maruyama_driven(
    p: &GameParams,
    x_init: Vec2,
    step_h: f64,
    increments: WienerIncrements,
    seed: u64,
) -> Result<SdePath> {
    if step_h.is_nan() || step_h <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "step_h must be positive, got {step_h}"
        )));
    }
    integrate(
        p,
        x_init,
        step_h,
        increments,
        seed,
        Scheme::EulerMaruyama,
        em_step_fn,
    )
}

/// The published second-order scheme, term for term: drift step, noise
/// step, diagonal Milstein correction b_ii·g_i·(G²−h)/2, the h²/2
/// drift-correction bracket, and the hG/2 mixed term (with the b21 factor
/// in component 2, as printed).
///
/// Two printed defects are repaired, both recorded in the project notes:
/// the drift occurrences carry the k_i factors of the game equation (the
/// printed scheme drops them, which would integrate a different SDE than the
/// reference integrator), and the bracket's deterministic part is the exact
/// Taylor correction D·∇D_i (the printed factor −2x1x2/S³·f_i is garbled and
/// would reduce the scheme to first order). The printed g_i·x1x2/S³ remnant
/// in the bracket is kept verbatim.
pub fn paper_taylor2(p: &GameParams, x_init: Vec2, spec: &WienerSpec) -> Result<SdePath> {
    let gamma = gamma_offsets(p)?;
    let increments = wiener_increments(spec)?;
    integrate(
        p,
        x_init,
        spec.step_h,
        increments,
        spec.seed,
        Scheme::PaperTaylor2,
        move |p, x, h, (gg1, gg2)| {
            let (x1, x2) = (x.x, x.y);
            let s = x1 + x2;
            let s2 = s * s;
            let s3 = s2 * s;
            let b = p.b;

            let d1 = p.k1 * (x2 / s2 - p.c1);
            let d2 = p.k2 * (x1 / s2 - p.c2);
            let g1 = b.m11 * x1 + b.m12 * x2 + gamma.x;
            let g2 = b.m21 * x1 + b.m22 * x2 + gamma.y;

            // grad D1 = (−2 k1 x2 / S³, k1 (x1 − x2)/S³), grad D2 symmetric
            let d1_x1 = -2.0 * p.k1 * x2 / s3;
            let d1_x2 = p.k1 * (x1 - x2) / s3;
            let d2_x1 = p.k2 * (x2 - x1) / s3;
            let d2_x2 = -2.0 * p.k2 * x1 / s3;

            let bracket1 = d1 * d1_x1 + d2 * d1_x2 + g1 * x1 * x2 / s3;
            let bracket2 = d1 * d2_x1 + d2 * d2_x2 + g2 * x1 * x2 / s3;

            let n1 = x1
                + h * d1
                + g1 * gg1
                + b.m11 * g1 * (gg1 * gg1 - h) * 0.5
                + bracket1 * h * h * 0.5
                + (b.m11 + d1_x1) * g1 * h * gg1 * 0.5;
            let n2 = x2
                + h * d2
                + g2 * gg2
                + b.m22 * g2 * (gg2 * gg2 - h) * 0.5
                + bracket2 * h * h * 0.5
                + (b.m21 + d2_x2) * g2 * h * gg2 * 0.5;
            Vec2::new(n1, n2)
        },
    )
}

/// Pointwise-in-time ensemble statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// Componentwise sample mean (two columns).
    Mean,
    /// E[x1² + x2²] (one column).
    SecondMoment,
    /// E‖x − x0‖² about the stationary state (one column).
    NormSqAboutX0,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
    pub observable: Observable,
}

/// Sample statistics across paths sharing one time grid and one parameter
/// set; summation order is fixed (path order) for determinism.
pub fn ensemble_stats(paths: &[SdePath], observable: Observable) -> Result<EnsembleSeries> {
    let first = paths
        .first()
        .ok_or_else(|| Error::MismatchedPaths("empty ensemble".into()))?;
    for (i, p) in paths.iter().enumerate() {
        if p.times.len() != first.times.len() {
            return Err(Error::MismatchedPaths(format!(
                "path {i} has {} samples, path 0 has {}",
                p.times.len(),
                first.times.len()
            )));
        }
        if p.params != first.params {
            return Err(Error::MismatchedPaths(format!(
                "path {i} has different parameters"
            )));
        }
    }
    let x0 = stationary_state(&first.params)?.as_vec();
    let n = first.times.len();
    let count = paths.len() as f64;
    let series = match observable {
        Observable::Mean => {
            let mut m1 = vec![0.0; n];
            let mut m2 = vec![0.0; n];
            for p in paths {
                for (j, s) in p.states.iter().enumerate() {
                    m1[j] += s.x;
                    m2[j] += s.y;
                }
            }
            for v in m1.iter_mut().chain(m2.iter_mut()) {
                *v /= count;
            }
            vec![m1, m2]
        }
        Observable::SecondMoment => {
            let mut m = vec![0.0; n];
            for p in paths {
                for (j, s) in p.states.iter().enumerate() {
                    m[j] += s.norm_sq();
                }
            }
            for v in m.iter_mut() {
                *v /= count;
            }
            vec![m]
        }
        Observable::NormSqAboutX0 => {
            let mut m = vec![0.0; n];
            for p in paths {
                for (j, s) in p.states.iter().enumerate() {
                    m[j] += (*s - x0).norm_sq();
                }
            }
            for v in m.iter_mut() {
                *v /= count;
            }
            vec![m]
        }
    };
    Ok(EnsembleSeries {
        times: first.times.clone(),
        columns: series,
        observable,
    })
}
