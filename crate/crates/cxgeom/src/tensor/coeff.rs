//! Ring-like coefficient types shared by forms and jets.
//!
//! Multiplication need not commute: matrix coefficients keep their left/right
//! order through every wedge product.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub trait Coeff: Clone + Send + Sync + 'static {
    fn zero_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    /// Max-abs size, used for tolerances only.
    fn magnitude(&self) -> f64;

    fn add_assign(&mut self, rhs: &Self) {
        *self = self.add(rhs);
    }
}

/// Coefficients that carry a complex structure.
pub trait ComplexCoeff: Coeff {
    fn scale_c(&self, s: Complex64) -> Self;
    fn conj(&self) -> Self;
}

impl Coeff for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
}

impl Coeff for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
}

impl ComplexCoeff for Complex64 {
    fn scale_c(&self, s: Complex64) -> Self {
        self * s
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

impl Coeff for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, s: f64) -> Self {
        self * Complex64::new(s, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
}

impl ComplexCoeff for CMat {
    fn scale_c(&self, s: Complex64) -> Self {
        self * s
    }
    /// Hermitian adjoint: the conjugation relevant for matrix-valued forms.
    fn conj(&self) -> Self {
        self.adjoint()
    }
}

impl Coeff for RMat {
    fn zero_like(&self) -> Self {
        RMat::zeros(self.nrows(), self.ncols())
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
}
