//! The Cournot duopoly SDE: two firms with inverse demand p(x) = 1/x and
//! affine costs adjust their quantities toward best responses under a shared
//! multiplicative noise. This module holds the model constants, the
//! stationary (Nash) state, the noise offsets that vanish there, and the
//! linearization used by the stability machinery.
//!
//! State space: x = (x1, x2), quantities of the two firms. Effective drift
//! of firm i is k_i (x_j / (x1 + x2)^2 − c_i); diffusion of firm i is
//! b_i1 x1 + b_i2 x2 + γ_i, where γ is constructed so the diffusion is zero
//! exactly at the stationary state.

use crate::config::{EPS_STATE, TOL_JACOBIAN_FD};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::system::{LinearSystem, NoiseWiring};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Model constants of the stochastic duopoly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Marginal cost of firm 1 (> 0).
    pub c1: f64,
    /// Marginal cost of firm 2 (> 0).
    pub c2: f64,
    /// Adjustment speed of firm 1 (> 0).
    pub k1: f64,
    /// Adjustment speed of firm 2 (> 0).
    pub k2: f64,
    /// Noise coefficient matrix b_ij.
    pub b: Mat2,
    /// Guard on x1 + x2 below which the inverse demand is treated as singular.
    pub eps_state: f64,
}

impl GameParams {
    pub fn new(c1: f64, c2: f64, k1: f64, k2: f64, b: Mat2) -> Result<Self> {
        let p = GameParams {
            c1,
            c2,
            k1,
            k2,
            b,
            eps_state: EPS_STATE,
        };
        p.validate()?;
        Ok(p)
    }

    /// Rotation–scale noise b = αI + βJ, the form used throughout the sweeps.
    pub fn with_rotation_scale(
        c1: f64,
        c2: f64,
        k1: f64,
        k2: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        GameParams::new(c1, c2, k1, k2, Mat2::rotation_scale(alpha, beta))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("k1", self.k1),
            ("k2", self.k2),
        ] {
            if v.is_nan() || v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be a positive real, got {v}"
                )));
            }
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidParams(
                "noise matrix b has non-finite entries".into(),
            ));
        }
        Ok(())
    }
}

/// The Nash equilibrium quantities where both drifts vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub x10: f64,
    pub x20: f64,
}

impl StationaryState {
    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.x10, self.x20)
    }
}

/// x10 = c2/(c1+c2)², x20 = c1/(c1+c2)².
pub fn stationary_state(p: &GameParams) -> Result<StationaryState> {
    p.validate()?;
    let s = p.c1 + p.c2;
    let s2 = s * s;
    Ok(StationaryState {
        x10: p.c2 / s2,
        x20: p.c1 / s2,
    })
}

/// Effective drift (k1·f1, k2·f2) with f_i = x_j/(x1+x2)² − c_i.
pub fn drift(p: &GameParams, x: Vec2) -> Result<Vec2> {
    let sum = x.x + x.y;
    if sum <= p.eps_state {
        return Err(Error::SingularState {
            sum,
            guard: p.eps_state,
        });
    }
    let inv_s2 = 1.0 / (sum * sum);
    Ok(Vec2::new(
        p.k1 * (x.y * inv_s2 - p.c1),
        p.k2 * (x.x * inv_s2 - p.c2),
    ))
}

/// Noise offsets (γ1, γ2) chosen so diffusion(stationary state) = 0.
///
/// Evaluated as γ_i = −(b_i1·x10 + b_i2·x20) with the same floating-point
/// operations as [`diffusion`] uses, which makes the cancellation at the
/// stationary state exact, not merely within rounding. Algebraically this is
/// the textbook γ_i = −(b_i1 c2 + b_i2 c1)/(c1+c2)².
pub fn gamma_offsets(p: &GameParams) -> Result<Vec2> {
    let x0 = stationary_state(p)?;
    Ok(Vec2::new(
        -(p.b.m11 * x0.x10 + p.b.m12 * x0.x20),
        -(p.b.m21 * x0.x10 + p.b.m22 * x0.x20),
    ))
}

/// Diffusion vector g_i(x) = b_i1 x1 + b_i2 x2 + γ_i.
pub fn diffusion(p: &GameParams, x: Vec2) -> Result<Vec2> {
    let g = gamma_offsets(p)?;
    Ok(Vec2::new(
        p.b.m11 * x.x + p.b.m12 * x.y + g.x,
        p.b.m21 * x.x + p.b.m22 * x.y + g.y,
    ))
}

/// The linearization of the game at its stationary state, together with the
/// recorded finite-difference cross-check of the drift Jacobian.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Linearization {
    pub system: LinearSystem,
    pub stationary: StationaryState,
    /// Max absolute entry deviation between the closed-form A and a central
    /// finite-difference Jacobian of the drift at the stationary state.
    pub fd_max_deviation: f64,
}

/// Drift Jacobian at the stationary state (closed form) plus B = b.
///
/// a11 = −2k1c1(c1+c2), a12 = −k1(c1²−c2²), a21 = k2(c1²−c2²),
/// a22 = −2k2c2(c1+c2). The closed form is verified against a central
/// finite-difference Jacobian; the deviation is recorded in the result.
pub fn linearize(p: &GameParams) -> Result<Linearization> {
    let x0 = stationary_state(p)?;
    let s = p.c1 + p.c2;
    let d = p.c1 * p.c1 - p.c2 * p.c2;
    let a = Mat2::new(
        -2.0 * p.k1 * p.c1 * s,
        -p.k1 * d,
        p.k2 * d,
        -2.0 * p.k2 * p.c2 * s,
    );
    let fd = fd_jacobian(p, x0.as_vec())?;
    let mut dev: f64 = 0.0;
    for (ca, cf) in a.entries().iter().zip(fd.entries()) {
        dev = dev.max((ca - cf).abs());
    }
    debug_assert!(dev < TOL_JACOBIAN_FD, "closed-form Jacobian off by {dev:e}");
    Ok(Linearization {
        system: LinearSystem::new(a, p.b, NoiseWiring::SharedWiener),
        stationary: x0,
        fd_max_deviation: dev,
    })
}

/// Central finite-difference Jacobian of the drift, step 1e-6·(1+|x|).
pub fn fd_jacobian(p: &GameParams, x: Vec2) -> Result<Mat2> {
    let hx = 1e-6 * (1.0 + x.x.abs());
    let hy = 1e-6 * (1.0 + x.y.abs());
    let fx_p = drift(p, Vec2::new(x.x + hx, x.y))?;
    let fx_m = drift(p, Vec2::new(x.x - hx, x.y))?;
    let fy_p = drift(p, Vec2::new(x.x, x.y + hy))?;
    let fy_m = drift(p, Vec2::new(x.x, x.y - hy))?;
    Ok(Mat2::new(
        (fx_p.x - fx_m.x) / (2.0 * hx),
        (fy_p.x - fy_m.x) / (2.0 * hy),
        (fx_p.y - fx_m.y) / (2.0 * hx),
        (fy_p.y - fy_m.y) / (2.0 * hy),
    ))
}

/// Roots of μ² − tr(A)μ + det(A) = 0 plus the half-trace.
///
/// The half-trace equals −(k1c1+k2c2)(c1+c2) for game-derived systems; it is
/// the common real part of the roots only when the discriminant is negative,
/// so the exact roots and the half-trace are reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoots {
    /// Root with the larger real part (ties broken by imaginary part).
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub half_trace: f64,
    pub discriminant: f64,
}

pub fn characteristic_roots(sys: &LinearSystem) -> CharacteristicRoots {
    let tr = sys.a.trace();
    let det = sys.a.det();
    let disc = tr * tr - 4.0 * det;
    let (mu1, mu2) = if disc >= 0.0 {
        let r = disc.sqrt();
        (
            Complex64::new(0.5 * (tr + r), 0.0),
            Complex64::new(0.5 * (tr - r), 0.0),
        )
    } else {
        let im = (-disc).sqrt() * 0.5;
        (Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im))
    };
    CharacteristicRoots {
        mu1,
        mu2,
        half_trace: 0.5 * tr,
        discriminant: disc,
    }
}
