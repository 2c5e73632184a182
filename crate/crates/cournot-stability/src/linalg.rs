//! Minimal fixed-size linear algebra for the 2-D systems used throughout.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A real 2×2 matrix in row-major entry form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 {
        m11: 0.0,
        m12: 0.0,
        m21: 0.0,
        m22: 0.0,
    };
    pub const IDENTITY: Mat2 = Mat2 {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub fn diagonal(d: f64) -> Self {
        Mat2::new(d, 0.0, 0.0, d)
    }

    /// The rotation–scale form αI + βJ with J the 90° rotation generator.
    pub fn rotation_scale(alpha: f64, beta: f64) -> Self {
        Mat2::new(alpha, -beta, beta, alpha)
    }

    /// Recovers (α, β) when the matrix has the rotation–scale form
    /// (m11 = m22, m12 = −m21), else `None`.
    pub fn as_rotation_scale(self) -> Option<(f64, f64)> {
        if self.m11 == self.m22 && self.m12 == -self.m21 {
            Some((self.m11, self.m21))
        } else {
            None
        }
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m11 * v.x + self.m12 * v.y,
            self.m21 * v.x + self.m22 * v.y,
        )
    }

    pub fn mul_mat(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn add_mat(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }

    pub fn is_finite(self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    pub fn entries(self) -> [f64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_scale_roundtrip() {
        let m = Mat2::rotation_scale(2.0, -3.0);
        assert_eq!(m.as_rotation_scale(), Some((2.0, -3.0)));
        assert_eq!(Mat2::new(1.0, 2.0, 3.0, 4.0).as_rotation_scale(), None);
    }

    #[test]
    fn mat_vec_and_det() {
        let m = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let v = m.mul_vec(Vec2::new(1.0, -1.0));
        assert_eq!((v.x, v.y), (-1.0, -1.0));
        assert_eq!(m.det(), -2.0);
        assert_eq!(m.trace(), 5.0);
    }

    #[test]
    fn identity_multiplication() {
        let m = Mat2::new(0.5, -1.5, 2.5, 7.0);
        assert_eq!(Mat2::IDENTITY.mul_mat(m), m);
        assert_eq!(m.mul_mat(Mat2::IDENTITY), m);
    }
}
