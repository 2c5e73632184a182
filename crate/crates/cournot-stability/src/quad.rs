//! Composite Simpson quadrature on uniform grids.
//!
//! All circle integrals in this crate use these routines; the integrands are
//! smooth and 2π-periodic, so plain composite Simpson converges fast and the
//! fixed evaluation order keeps results independent of thread count.

/// Integral of tabulated values over a closed uniform grid with an even
/// number of intervals.
///
/// Panics if fewer than three points or an odd interval count is supplied.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "composite Simpson needs an even interval count, got {n}"
    );
    let mut s4 = 0.0;
    let mut s2 = 0.0;
    let mut i = 1;
    while i < n {
        s4 += values[i];
        if i + 1 < n {
            s2 += values[i + 1];
        }
        i += 2;
    }
    (h / 3.0) * (values[0] + values[n] + 4.0 * s4 + 2.0 * s2)
}

/// Integral of `f(theta) * weight[theta]` over the same grid convention.
pub fn simpson_weighted<F: Fn(f64) -> f64>(f: F, grid: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(grid.len(), weights.len());
    let h = grid[1] - grid[0];
    let vals: Vec<f64> = grid.iter().zip(weights).map(|(&t, &w)| f(t) * w).collect();
    simpson(&vals, h)
}

/// Cumulative integral of a closed-form integrand at `n + 1` uniform points
/// of `[a, b]`, one Simpson rule per interval using its midpoint.
///
/// Fourth-order accurate for smooth integrands and usable for stiff
/// exponents because it never forms the exponential.
pub fn cumulative_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let h = (b - a) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    let mut f_left = f(a);
    for i in 0..n {
        let x0 = a + i as f64 * h;
        let fm = f(x0 + 0.5 * h);
        let f_right = f(x0 + h);
        acc += (h / 6.0) * (f_left + 4.0 * fm + f_right);
        out.push(acc);
        f_left = f_right;
    }
    out
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let n = 64;
        let h = 1.0 / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        let exact = 0.25 - 1.0 + 1.0;
        assert!((simpson(&vals, h) - exact).abs() < 1e-14);
    }

    #[test]
    fn simpson_on_periodic_integrand() {
        let n = 128;
        let h = 2.0 * PI / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin().powi(2)).collect();
        assert!((simpson(&vals, h) - PI).abs() < 1e-10);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let n = 200;
        let cum = cumulative_simpson(|x| x.cos(), 0.0, 2.0, n);
        for (i, &c) in cum.iter().enumerate() {
            let x = 2.0 * i as f64 / n as f64;
            assert!((c - x.sin()).abs() < 1e-11, "at x={x}: {c} vs {}", x.sin());
        }
    }

    #[test]
    fn log_add_exp_extremes() {
        assert!((log_add_exp(0.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        let big = log_add_exp(1000.0, 1000.0);
        assert!((big - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
