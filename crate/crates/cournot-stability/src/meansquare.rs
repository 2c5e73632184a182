//! Mean-square stability via quadratic Lyapunov functions.
//!
//! For V(u) = ½(w1 u1² + w2 u2²) the generator of the linearized SDE maps V
//! to the quadratic form c11 u1² + c12 u1 u2 + c22 u2². The classical
//! (A1, q1, q2) conditions are reported verbatim for fidelity, but the verdict comes
//! from a direct negative-definiteness search over the weight ratio
//! t = w1/w2, which is exactly the hypothesis of the mean-square stability
//! theorem. A Monte-Carlo second-moment fit serves as the empirical oracle.
//!
//! The quadratic-form expression carries no cross-diffusion term, which is
//! exact for independent per-component noises; that wiring is this module's
//! default reading. For the diagonal V used here the shared-wiring generator
//! produces the same form, since ∂²V/∂u1∂u2 = 0.
//!
//! Scope: mean-square stability (p = 2) only. Exponential p-stability for
//! general p needs a concrete Lyapunov pair (V, p) that this model does not
//! supply, so no executable check for it exists here.

use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::rng::Stream;
use crate::system::{em_step, LinearSystem, NoiseWiring};
use serde::Serialize;

/// Weights of the candidate Lyapunov function V(u) = ½(w1 u1² + w2 u2²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticLyapunov {
    pub w1: f64,
    pub w2: f64,
}

impl QuadraticLyapunov {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1 > 0.0 && w2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "Lyapunov weights must be positive, got ({w1}, {w2})"
            )));
        }
        Ok(QuadraticLyapunov { w1, w2 })
    }

    pub fn eval(&self, u: Vec2) -> f64 {
        0.5 * (self.w1 * u.x * u.x + self.w2 * u.y * u.y)
    }
}

/// Coefficients of LV as the quadratic form c11 u1² + c12 u1u2 + c22 u2².
pub fn lv_coefficients(sys: &LinearSystem, v: &QuadraticLyapunov) -> (f64, f64, f64) {
    let a = sys.a;
    let b = sys.b;
    let c11 = a.m11 * v.w1 + 0.5 * b.m11 * b.m11 * v.w1 + 0.5 * b.m21 * b.m21 * v.w2;
    let c22 = a.m22 * v.w2 + 0.5 * b.m12 * b.m12 * v.w1 + 0.5 * b.m22 * b.m22 * v.w2;
    let c12 = a.m12 * v.w1 + a.m21 * v.w2 + b.m11 * b.m12 * v.w1 + b.m21 * b.m22 * v.w2;
    (c11, c12, c22)
}

/// LV(u) assembled from the generator definition itself: drift·∇V plus
/// ½ Σ g_i² ∂²V/∂u_i²; the independent validation route for
/// [`lv_coefficients`].
pub fn lv_operator_eval(sys: &LinearSystem, v: &QuadraticLyapunov, u: Vec2) -> f64 {
    let f = sys.drift(u);
    let g = sys.diffusion(u);
    let grad = Vec2::new(v.w1 * u.x, v.w2 * u.y);
    f.dot(grad) + 0.5 * (g.x * g.x * v.w1 + g.y * g.y * v.w2)
}

/// The classical algebraic mean-square conditions, reported verbatim:
/// A1 = −(a21 + b21 b22)/(a12 + b11 b12), q1 = (a11 + ½b11²)A1 − ½b21²,
/// q2 = −a22 − ½b22² + ½b12² A1, passes ⇔ A1 < 0 ∧ q1 > 0 ∧ q2 > 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PaperConditions {
    pub a1: f64,
    pub q1: f64,
    pub q2: f64,
    pub passes: bool,
}

pub fn paper_conditions(sys: &LinearSystem) -> Result<PaperConditions> {
    let a = sys.a;
    let b = sys.b;
    let denom = a.m12 + b.m11 * b.m12;
    if denom.abs() < 1e-12 {
        return Err(Error::DivisionDegenerate { denominator: denom });
    }
    let a1 = -(a.m21 + b.m21 * b.m22) / denom;
    let q1 = (a.m11 + 0.5 * b.m11 * b.m11) * a1 - 0.5 * b.m21 * b.m21;
    let q2 = -a.m22 - 0.5 * b.m22 * b.m22 + 0.5 * b.m12 * b.m12 * a1;
    Ok(PaperConditions {
        a1,
        q1,
        q2,
        passes: a1 < 0.0 && q1 > 0.0 && q2 > 0.0,
    })
}

/// A weight ratio making LV negative definite, with the form coefficients
/// at that ratio and the positivity margin found.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DefinitenessCertificate {
    pub w_ratio: f64,
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub margin: f64,
    pub negative_definite: bool,
}

fn margin_at(sys: &LinearSystem, t: f64) -> (f64, f64, f64, f64) {
    let v = QuadraticLyapunov { w1: t, w2: 1.0 };
    let (c11, c12, c22) = lv_coefficients(sys, &v);
    let m = (-c11).min(-c22).min(4.0 * c11 * c22 - c12 * c12);
    (m, c11, c12, c22)
}

/// Searches t = w1/w2 over a 1024-point log grid on 10^[−6, 6], refines the
/// best point by golden-section on log t, and returns a certificate when the
/// margin min(−c11, −c22, 4c11c22 − c12²) is positive. Absence means "not
/// certified", not "proven unstable".
pub fn definiteness_certificate(sys: &LinearSystem) -> Option<DefinitenessCertificate> {
    const POINTS: usize = 1024;
    let mut best_idx = 0;
    let mut best_margin = f64::NEG_INFINITY;
    let exp_at = |i: usize| -6.0 + 12.0 * i as f64 / (POINTS - 1) as f64;
    for i in 0..POINTS {
        let (m, _, _, _) = margin_at(sys, 10f64.powf(exp_at(i)));
        if m > best_margin {
            best_margin = m;
            best_idx = i;
        }
    }
    // golden-section maximization of the margin over log10 t
    let mut lo = exp_at(best_idx.saturating_sub(1));
    let mut hi = exp_at((best_idx + 1).min(POINTS - 1));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = margin_at(sys, 10f64.powf(x1)).0;
    let mut f2 = margin_at(sys, 10f64.powf(x2)).0;
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = margin_at(sys, 10f64.powf(x2)).0;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = margin_at(sys, 10f64.powf(x1)).0;
        }
    }
    let t = 10f64.powf(0.5 * (lo + hi));
    let (m, c11, c12, c22) = margin_at(sys, t);
    let (t, m, c11, c12, c22) = if m >= best_margin {
        (t, m, c11, c12, c22)
    } else {
        let tg = 10f64.powf(exp_at(best_idx));
        let (mg, a, b, c) = margin_at(sys, tg);
        (tg, mg, a, b, c)
    };
    if m > 0.0 {
        Some(DefinitenessCertificate {
            w_ratio: t,
            c11,
            c12,
            c22,
            margin: m,
            negative_definite: true,
        })
    } else {
        None
    }
}

/// Result of the empirical second-moment fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McMomentCheck {
    pub fit_rate: f64,
    pub fit_std_error: f64,
    /// fit_rate < −3 · fit_std_error.
    pub decay_observed: bool,
}

/// Simulates the linear SDE from ‖u(0)‖ = 1 (half the ensemble from (1,0),
/// half from (0,1)), respecting the system wiring, and fits log E‖u(t)‖²
/// by least squares over the second half of [0, T].
pub fn mc_second_moment_check(
    sys: &LinearSystem,
    seed: u64,
    n_paths: usize,
    horizon: f64,
    step_h: f64,
) -> Result<McMomentCheck> {
    if n_paths < 100 {
        return Err(Error::InvalidParams(format!(
            "second-moment check needs n_paths >= 100, got {n_paths}"
        )));
    }
    if step_h.is_nan() || step_h <= 0.0 || horizon <= step_h {
        return Err(Error::InvalidParams(
            "second-moment check needs horizon > step_h > 0".into(),
        ));
    }
    let n_steps = (horizon / step_h).round() as usize;
    let record_every = (n_steps / 2000).max(1);
    let n_records = n_steps / record_every;

    let mut second_moment = vec![0.0_f64; n_records];
    for path in 0..n_paths {
        let mut stream = Stream::new(seed, path as u64);
        let mut u = if path < n_paths / 2 {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, 1.0)
        };
        let mut slot = 0;
        for step_idx in 0..n_steps {
            let g = match sys.wiring {
                NoiseWiring::SharedWiener => [stream.next_increment(step_h), 0.0],
                NoiseWiring::IndependentWieners => {
                    [stream.next_increment(step_h), stream.next_increment(step_h)]
                }
            };
            u = em_step(sys, u, step_h, g);
            if (step_idx + 1) % record_every == 0 && slot < n_records {
                second_moment[slot] += u.norm_sq();
                slot += 1;
            }
        }
    }
    for m in second_moment.iter_mut() {
        *m /= n_paths as f64;
    }

    // least squares on log E over the second half, skipping non-positive
    // entries (possible only when the moment underflows to zero)
    let start = n_records / 2;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (j, &m) in second_moment.iter().enumerate().skip(start) {
        if m > 0.0 && m.is_finite() {
            ts.push(((j + 1) * record_every) as f64 * step_h);
            ys.push(m.ln());
        }
    }
    if ts.len() < 8 {
        return Err(Error::InvalidParams(
            "second-moment fit window has too few usable points (moment underflowed?)".into(),
        ));
    }
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).powi(2))
        .sum();
    let se = (ss_res / (n - 2.0) / sxx).sqrt();
    Ok(McMomentCheck {
        fit_rate: slope,
        fit_std_error: se,
        decay_observed: slope < -3.0 * se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    MeanSquareStable,
    NotCertified,
}

/// Aggregate report: algebraic conditions verbatim, corrected certificate,
/// optional Monte-Carlo check. The verdict depends only on the certificate.
#[derive(Debug, Clone, Serialize)]
pub struct MeanSquareReport {
    pub wiring: NoiseWiring,
    pub paper_conditions: Option<PaperConditions>,
    /// Set when the algebraic conditions could not be evaluated (a12 + b11b12 ≈ 0).
    pub paper_conditions_degenerate: Option<String>,
    pub certificate: Option<DefinitenessCertificate>,
    pub mc_check: Option<McMomentCheck>,
    pub verdict: Verdict,
}

pub fn mean_square_report(sys: &LinearSystem, mc: Option<McMomentCheck>) -> MeanSquareReport {
    let (paper, degenerate) = match paper_conditions(sys) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let certificate = definiteness_certificate(sys);
    let verdict = if certificate.is_some() {
        Verdict::MeanSquareStable
    } else {
        Verdict::NotCertified
    };
    MeanSquareReport {
        wiring: sys.wiring,
        paper_conditions: paper,
        paper_conditions_degenerate: degenerate,
        certificate,
        mc_check: mc,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;

    fn sys(a: Mat2, b: Mat2) -> LinearSystem {
        LinearSystem::new(a, b, NoiseWiring::IndependentWieners)
    }

    #[test]
    fn lv_coefficients_examples() {
        let unit = QuadraticLyapunov::new(1.0, 1.0).unwrap();
        let (c11, c12, c22) = lv_coefficients(&sys(Mat2::diagonal(-1.0), Mat2::ZERO), &unit);
        assert_eq!((c11, c12, c22), (-1.0, 0.0, -1.0));

        let (c11, c12, c22) = lv_coefficients(&sys(Mat2::ZERO, Mat2::IDENTITY), &unit);
        assert_eq!((c11, c12, c22), (0.5, 0.0, 0.5));

        let reference = Mat2::new(-0.176, 0.792, -1.584, -3.52);
        let (c11, c12, c22) =
            lv_coefficients(&sys(reference, Mat2::rotation_scale(2.0, 2.0)), &unit);
        assert!((c11 - 3.824).abs() < 1e-12);
        assert!((c22 - 0.48).abs() < 1e-12);
        assert!((c12 + 0.792).abs() < 1e-12);
    }

    #[test]
    fn operator_consistency_on_random_draws() {
        let mut stream = Stream::new(2024, 0);
        let mut r = move || 4.0 * stream.next_uniform() - 2.0;
        for _ in 0..100 {
            let a = Mat2::new(r(), r(), r(), r());
            let b = Mat2::new(r(), r(), r(), r());
            let v = QuadraticLyapunov::new(r().abs() + 0.1, r().abs() + 0.1).unwrap();
            let s = sys(a, b);
            let (c11, c12, c22) = lv_coefficients(&s, &v);
            for _ in 0..100 {
                let u = Vec2::new(r(), r());
                let form = c11 * u.x * u.x + c12 * u.x * u.y + c22 * u.y * u.y;
                let direct = lv_operator_eval(&s, &v, u);
                let scale = form.abs().max(direct.abs()).max(1e-12);
                assert!((form - direct).abs() <= 1e-10 * scale, "{form} vs {direct}");
                // the form is even
                assert_eq!(direct, lv_operator_eval(&s, &v, -u));
            }
        }
    }

    #[test]
    fn paper_conditions_reference_example() {
        let reference = Mat2::new(-0.176, 0.792, -1.584, -3.52);
        let pc = paper_conditions(&sys(reference, Mat2::rotation_scale(2.0, 2.0))).unwrap();
        assert!((pc.a1 - 0.75312).abs() < 1e-5, "{}", pc.a1);
        assert!(!pc.passes);
    }

    #[test]
    fn paper_conditions_degenerate_denominator() {
        let e = paper_conditions(&sys(Mat2::diagonal(-1.0), Mat2::ZERO)).unwrap_err();
        assert!(matches!(e, Error::DivisionDegenerate { .. }));
    }

    #[test]
    fn paper_conditions_diverge_from_certificate() {
        // stable spiral: the algebraic conditions fail (A1 = 1 > 0) but the
        // definiteness search certifies stability at t = 1
        let a = Mat2::new(-1.0, 1.0, -1.0, -1.0);
        let s = sys(a, Mat2::ZERO);
        let pc = paper_conditions(&s).unwrap();
        assert!((pc.a1 - 1.0).abs() < 1e-12);
        assert!(!pc.passes);
        let cert = definiteness_certificate(&s).expect("certificate should exist");
        assert!(cert.negative_definite);
        assert!((cert.w_ratio - 1.0).abs() < 0.05, "{}", cert.w_ratio);
        assert!((cert.c11 + 1.0).abs() < 0.05 && (cert.c22 + 1.0).abs() < 0.05);
        assert!(cert.c12.abs() < 0.05);

        let report = mean_square_report(&s, None);
        assert_eq!(report.verdict, Verdict::MeanSquareStable);
    }

    #[test]
    fn certificate_absent_for_noise_inflated_system() {
        assert!(definiteness_certificate(&sys(Mat2::ZERO, Mat2::IDENTITY)).is_none());
        let report = mean_square_report(&sys(Mat2::ZERO, Mat2::IDENTITY), None);
        assert_eq!(report.verdict, Verdict::NotCertified);
    }

    #[test]
    fn certificate_for_diagonal_stable_system() {
        let cert = definiteness_certificate(&sys(Mat2::diagonal(-1.0), Mat2::ZERO)).unwrap();
        assert!(cert.margin > 0.9, "margin {}", cert.margin);
        assert!((cert.c22 + 1.0).abs() < 1e-9);
    }

    #[test]
    fn second_moment_deterministic_decay() {
        let s = sys(Mat2::diagonal(-1.0), Mat2::ZERO);
        let chk = mc_second_moment_check(&s, 1, 100, 20.0, 1e-3).unwrap();
        assert!((chk.fit_rate + 2.0).abs() < 0.05, "{}", chk.fit_rate);
        assert!(chk.decay_observed);
    }

    #[test]
    fn second_moment_scalar_oracles() {
        // E||u||^2 = e^{(2a+α²)t}; short horizon keeps the lognormal tail
        // from starving the ensemble mean
        let stable = LinearSystem::new(
            Mat2::diagonal(-1.0),
            Mat2::diagonal(1.0),
            NoiseWiring::SharedWiener,
        );
        let chk = mc_second_moment_check(&stable, 3, 20_000, 1.0, 1e-3).unwrap();
        assert!((chk.fit_rate + 1.0).abs() < 0.15, "{}", chk.fit_rate);

        let skew = LinearSystem::new(
            Mat2::ZERO,
            Mat2::rotation_scale(0.0, 1.0),
            NoiseWiring::SharedWiener,
        );
        let chk = mc_second_moment_check(&skew, 3, 20_000, 1.0, 1e-3).unwrap();
        assert!((chk.fit_rate - 1.0).abs() < 0.15, "{}", chk.fit_rate);
        assert!(!chk.decay_observed);
    }

    #[test]
    fn certified_systems_decay_empirically() {
        let candidates = [
            sys(Mat2::diagonal(-1.0), Mat2::ZERO),
            sys(Mat2::new(-1.0, 1.0, -1.0, -1.0), Mat2::ZERO),
            sys(Mat2::diagonal(-1.5), Mat2::diagonal(0.5)),
        ];
        for s in candidates {
            let cert = definiteness_certificate(&s);
            assert!(cert.is_some(), "{s:?}");
            let chk = mc_second_moment_check(&s, 7, 500, 20.0, 1e-3).unwrap();
            assert!(
                chk.decay_observed,
                "{s:?}: rate {} se {}",
                chk.fit_rate, chk.fit_std_error
            );
        }
    }

    #[test]
    fn path_count_validation() {
        let s = sys(Mat2::diagonal(-1.0), Mat2::ZERO);
        assert!(matches!(
            mc_second_moment_check(&s, 1, 10, 20.0, 1e-3),
            Err(Error::InvalidParams(_))
        ));
    }
}
