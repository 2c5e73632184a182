//! The linearized SDE dX = AX dt + BX dw and its one-step propagators.

use crate::linalg::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

/// How the diffusion rows are driven: one shared Wiener process (the game
/// equation's form) or one independent Wiener per component. Never
/// defaulted silently; constructors take it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseWiring {
    SharedWiener,
    IndependentWieners,
}

/// A 2-D linear SDE: drift matrix, diffusion matrix, and noise wiring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub a: Mat2,
    pub b: Mat2,
    pub wiring: NoiseWiring,
}

impl LinearSystem {
    pub fn new(a: Mat2, b: Mat2, wiring: NoiseWiring) -> Self {
        LinearSystem { a, b, wiring }
    }

    /// Diffusion of the two components at state u; row i of B applied to u.
    pub fn diffusion(&self, u: Vec2) -> Vec2 {
        self.b.mul_vec(u)
    }

    pub fn drift(&self, u: Vec2) -> Vec2 {
        self.a.mul_vec(u)
    }
}

/// One Euler–Maruyama step. `g` carries one increment for shared wiring and
/// two for independent wiring (the second ignored/respected accordingly).
pub fn em_step(sys: &LinearSystem, u: Vec2, h: f64, g: [f64; 2]) -> Vec2 {
    let drift = sys.drift(u) * h;
    let diff = sys.diffusion(u);
    let noise = match sys.wiring {
        NoiseWiring::SharedWiener => Vec2::new(diff.x * g[0], diff.y * g[0]),
        NoiseWiring::IndependentWieners => Vec2::new(diff.x * g[0], diff.y * g[1]),
    };
    u + drift + noise
}

/// One strong-order-1 (Milstein) step.
///
/// Shared wiring uses the exact single-Wiener second-order term
/// ½B²u(G²−h). Independent wiring uses the diagonal terms plus the
/// symmetric-part cross term with I_{12} ≈ ½G₁G₂ (the Lévy area is
/// omitted, which leaves the weak order intact).
pub fn milstein_step(sys: &LinearSystem, u: Vec2, h: f64, g: [f64; 2]) -> Vec2 {
    let base = em_step(sys, u, h, g);
    let b = sys.b;
    match sys.wiring {
        NoiseWiring::SharedWiener => {
            let correction = b.mul_mat(b).mul_vec(u) * (0.5 * (g[0] * g[0] - h));
            base + correction
        }
        NoiseWiring::IndependentWieners => {
            let g1 = b.m11 * u.x + b.m12 * u.y;
            let g2 = b.m21 * u.x + b.m22 * u.y;
            // L^1 sigma^1 = b11 g1 e1, L^2 sigma^2 = b22 g2 e2
            let diag = Vec2::new(
                0.5 * b.m11 * g1 * (g[0] * g[0] - h),
                0.5 * b.m22 * g2 * (g[1] * g[1] - h),
            );
            // L^1 sigma^2 = b21 g1 e2, L^2 sigma^1 = b12 g2 e1, I_{jl} ~ G1 G2 / 2
            let cross = Vec2::new(
                0.5 * b.m12 * g2 * (g[0] * g[1]),
                0.5 * b.m21 * g1 * (g[0] * g[1]),
            );
            base + diag + cross
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn em_shared_vs_independent_wiring() {
        let b = Mat2::new(1.0, 0.5, -0.25, 2.0);
        let a = Mat2::ZERO;
        let u = Vec2::new(1.0, 1.0);
        let shared = em_step(
            &LinearSystem::new(a, b, NoiseWiring::SharedWiener),
            u,
            0.0,
            [0.1, 0.7],
        );
        let indep = em_step(
            &LinearSystem::new(a, b, NoiseWiring::IndependentWieners),
            u,
            0.0,
            [0.1, 0.7],
        );
        assert_eq!(shared.x, indep.x); // component 1 sees g[0] either way
        assert_ne!(shared.y, indep.y);
    }

    #[test]
    fn milstein_reduces_to_em_without_noise() {
        let sys = LinearSystem::new(
            Mat2::new(-1.0, 0.3, 0.0, -2.0),
            Mat2::ZERO,
            NoiseWiring::SharedWiener,
        );
        let u = Vec2::new(0.4, -0.2);
        assert_eq!(
            milstein_step(&sys, u, 1e-2, [0.3, 0.0]),
            em_step(&sys, u, 1e-2, [0.3, 0.0])
        );
    }

    #[test]
    fn milstein_skew_noise_preserves_norm_identity() {
        // For B = J and A = 0 the Milstein factor has norm^2 = (1 - (g^2-h)/2)^2 + g^2.
        let sys = LinearSystem::new(
            Mat2::ZERO,
            Mat2::rotation_scale(0.0, 1.0),
            NoiseWiring::SharedWiener,
        );
        let u = Vec2::new(1.0, 0.0);
        let (h, g) = (1e-3, 0.02);
        let v = milstein_step(&sys, u, h, [g, 0.0]);
        let expected = (1.0 - 0.5 * (g * g - h)).powi(2) + g * g;
        assert!((v.norm_sq() - expected).abs() < 1e-15);
    }
}
