//! Dense 2×2 complex matrices.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 2×2 complex matrix `[[m[0], m[1]], [m[2], m[3]]]`.
///
/// The entry numbering `m[0..4]` matches the `1..4` numbering used for the
/// Jost functions `f_j` and the transfer-matrix entries `a_Lj`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [Complex64; 4],
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [a, b, c, d] }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> Complex64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    /// Adjugate; equals the inverse when `det == 1`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.m[3], -self.m[1], -self.m[2], self.m[0])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.m[0] * s, self.m[1] * s, self.m[2] * s, self.m[3] * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::new(self.m[0] * s, self.m[1] * s, self.m[2] * s, self.m[3] * s)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.m[0].conj(), self.m[1].conj(), self.m[2].conj(), self.m[3].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn col(&self, j: usize) -> [Complex64; 2] {
        [self.m[j], self.m[2 + j]]
    }

    /// Spectral (operator 2-) norm.
    pub fn norm2(&self) -> f64 {
        // Largest singular value from the Hermitian Gram matrix M^*M.
        let [a, b, c, d] = self.m;
        let p = a.norm_sqr() + c.norm_sqr();
        let q = b.norm_sqr() + d.norm_sqr();
        let r = a.conj() * b + c.conj() * d;
        let half_tr = 0.5 * (p + q);
        let disc = (0.25 * (p - q) * (p - q) + r.norm_sqr()).sqrt();
        (half_tr + disc).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = o.m;
        Mat2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0] + o.m[0],
            self.m[1] + o.m[1],
            self.m[2] + o.m[2],
            self.m[3] + o.m[3],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0] - o.m[0],
            self.m[1] - o.m[1],
            self.m[2] - o.m[2],
            self.m[3] - o.m[3],
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m[0], -self.m[1], -self.m[2], -self.m[3])
    }
}

/// Dirac matrix `Γ¹ = diag(1, −1)`.
pub fn gamma1() -> Mat2 {
    Mat2::real(1.0, 0.0, 0.0, -1.0)
}

/// Dirac matrix `Γ² = [[0, 1], [1, 0]]`.
pub fn gamma2() -> Mat2 {
    Mat2::real(0.0, 1.0, 1.0, 0.0)
}

/// Free propagator `exp(iΓ¹·θ) = diag(e^{iθ}, e^{−iθ})`.
pub fn exp_i_gamma1(theta: f64) -> Mat2 {
    let p = Complex64::from_polar(1.0, theta);
    Mat2::diag(p, p.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_matrices_anticommute() {
        let g1 = gamma1();
        let g2 = gamma2();
        let anti = g1 * g2 + g2 * g1;
        assert_eq!(anti, Mat2::zero());
        assert_eq!(g1 * g1, Mat2::identity());
        assert_eq!(g2 * g2, Mat2::identity());
    }

    #[test]
    fn adjugate_inverts_unimodular() {
        let m = Mat2::new(
            Complex64::new(2.0, 1.0),
            Complex64::new(0.5, -0.3),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let s = m.det().sqrt();
        let u = m.scale(1.0 / s);
        let p = u.adjugate() * u;
        assert!((p - Mat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_of_unitary_is_one() {
        assert!((exp_i_gamma1(0.7).norm2() - 1.0).abs() < 1e-15);
        let m = Mat2::real(3.0, 0.0, 0.0, -5.0);
        assert!((m.norm2() - 5.0).abs() < 1e-14);
    }
}
