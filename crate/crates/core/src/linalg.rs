//! Two-component spinors and 2×2 matrices.
//!
//! Hermitian 2×2 operators are stored in Pauli form `a·I + b·σ`, which makes
//! the propagator `exp(-i (a·I + b·σ) τ)` available in closed form.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

pub(crate) fn norm3(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// A two-component complex state `(upper, lower)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    pub upper: C64,
    pub lower: C64,
}

impl Spinor {
    pub const fn new(upper: C64, lower: C64) -> Self {
        Self { upper, lower }
    }

    pub fn real(upper: f64, lower: f64) -> Self {
        Self::new(C64::new(upper, 0.0), C64::new(lower, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.upper.conj() * other.upper + self.lower.conj() * other.lower
    }

    pub fn scale(&self, k: C64) -> Spinor {
        Spinor::new(self.upper * k, self.lower * k)
    }

    pub fn normalized(&self) -> Option<Spinor> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        (self.upper - other.upper).norm().max((self.lower - other.lower).norm())
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.upper.re, self.upper.im, self.lower.re, self.lower.im]
    }

    pub(crate) fn from_slice(x: &[f64]) -> Spinor {
        Spinor::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.upper + rhs.upper, self.lower + rhs.lower)
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.upper - rhs.upper, self.lower - rhs.lower)
    }
}

/// Dense 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    /// Matrix whose columns are `a` and `b`.
    pub fn from_columns(a: &Spinor, b: &Spinor) -> Self {
        Mat2([[a.upper, b.upper], [a.lower, b.lower]])
    }

    pub fn column(&self, j: usize) -> Spinor {
        Spinor::new(self.0[0][j], self.0[1][j])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        Spinor::new(m[0][0] * v.upper + m[0][1] * v.lower, m[1][0] * v.upper + m[1][1] * v.lower)
    }

    pub fn scale(&self, k: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

/// Hermitian 2×2 operator `scalar·I + vector·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Herm2 {
    pub scalar: f64,
    pub vector: Vec3,
}

impl Herm2 {
    pub fn zero() -> Self {
        Self { scalar: 0.0, vector: [0.0; 3] }
    }

    /// Build from the real diagonal and the (0,1) entry; the (1,0) entry is
    /// implied by Hermiticity.
    pub fn from_entries(d00: f64, d11: f64, off01: C64) -> Self {
        Self { scalar: 0.5 * (d00 + d11), vector: [off01.re, -off01.im, 0.5 * (d00 - d11)] }
    }

    pub fn entries(&self) -> (f64, f64, C64) {
        let [bx, by, bz] = self.vector;
        (self.scalar + bz, self.scalar - bz, C64::new(bx, -by))
    }

    pub fn to_matrix(&self) -> Mat2 {
        let (d0, d1, off) = self.entries();
        Mat2([[C64::new(d0, 0.0), off], [off.conj(), C64::new(d1, 0.0)]])
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        self.to_matrix().apply(v)
    }

    /// `⟨v|K|v⟩`, real for Hermitian `K`.
    pub fn expectation(&self, v: &Spinor) -> f64 {
        v.inner(&self.apply(v)).re
    }

    /// Half the eigenvalue gap, `|vector|`.
    pub fn half_gap(&self) -> f64 {
        norm3(&self.vector)
    }

    /// `exp(-i K τ)` in closed form,
    /// `e^{-i a τ} [cos(|b|τ) I - i sin(|b|τ) b̂·σ]`.
    pub fn propagator(&self, tau: f64) -> Mat2 {
        let nb = self.half_gap();
        let x = nb * tau;
        let cos = x.cos();
        // sin(|b|τ)/|b|, finite as |b| -> 0
        let sinc = if nb > 0.0 { x.sin() / nb } else { tau };
        let [bx, by, bz] = self.vector;
        let global = C64::from_polar(1.0, -self.scalar * tau);
        let m = Mat2([
            [C64::new(cos, -sinc * bz), C64::new(-sinc * by, -sinc * bx)],
            [C64::new(sinc * by, -sinc * bx), C64::new(cos, sinc * bz)],
        ]);
        m.scale(global)
    }
}

impl Add for Herm2 {
    type Output = Herm2;
    fn add(self, rhs: Herm2) -> Herm2 {
        Herm2 {
            scalar: self.scalar + rhs.scalar,
            vector: [self.vector[0] + rhs.vector[0], self.vector[1] + rhs.vector[1], self.vector[2] + rhs.vector[2]],
        }
    }
}
