//! Small fixed-size linear algebra: 3-vectors and symmetric 3×3 matrices.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Japanese bracket `(1 + |v|²)^{1/2}`.
#[inline]
pub fn bracket(v: &Vec3) -> f64 {
    (1.0 + dot(v, v)).sqrt()
}

/// Reflection through the plane `{y₃ = 0}`.
#[inline]
pub fn reflect3(v: &Vec3) -> Vec3 {
    [v[0], v[1], -v[2]]
}

pub fn to_vector(v: &Vec3) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

pub fn from_vector(v: &Vector3<f64>) -> Vec3 {
    [v[0], v[1], v[2]]
}

/// Symmetric 3×3 matrix stored by its six independent entries.
///
/// Entry order is `[a11, a22, a33, a12, a13, a23]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix3 {
    pub entries: [f64; 6],
}

/// Index pairs of the six stored entries.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

impl SymMatrix3 {
    pub const fn new(a11: f64, a22: f64, a33: f64, a12: f64, a13: f64, a23: f64) -> Self {
        Self {
            entries: [a11, a22, a33, a12, a13, a23],
        }
    }

    pub const fn zero() -> Self {
        Self { entries: [0.0; 6] }
    }

    pub const fn identity() -> Self {
        Self::scaled_identity(1.0)
    }

    pub const fn scaled_identity(s: f64) -> Self {
        Self::new(s, s, s, 0.0, 0.0, 0.0)
    }

    pub const fn diag(d: [f64; 3]) -> Self {
        Self::new(d[0], d[1], d[2], 0.0, 0.0, 0.0)
    }

    /// Symmetric part of an arbitrary matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let s = |i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);
        Self::new(s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2))
    }

    /// Rank-one matrix `l lᵀ`.
    pub fn outer(l: &Vec3) -> Self {
        Self::new(
            l[0] * l[0],
            l[1] * l[1],
            l[2] * l[2],
            l[0] * l[1],
            l[0] * l[2],
            l[1] * l[2],
        )
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.entries[0],
            (1, 1) => self.entries[1],
            (2, 2) => self.entries[2],
            (0, 1) => self.entries[3],
            (0, 2) => self.entries[4],
            (1, 2) => self.entries[5],
            _ => panic!("index ({i}, {j}) out of range"),
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        self.entries[0] + self.entries[1] + self.entries[2]
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.get(i, 0) * v[0] + self.get(i, 1) * v[1] + self.get(i, 2) * v[2];
        }
        out
    }

    /// Quadratic form `vᵀ A v`.
    #[inline]
    pub fn quad(&self, v: &Vec3) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut e = self.entries;
        for (a, b) in e.iter_mut().zip(other.entries.iter()) {
            *a += b;
        }
        Self { entries: e }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut e = self.entries;
        e.iter_mut().for_each(|a| *a *= s);
        Self { entries: e }
    }

    /// Max-abs entry norm.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut ev = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Largest `δ` with `δ|ξ|² ≤ ξᵀAξ ≤ δ⁻¹|ξ|²`; non-positive when not positive definite.
    pub fn ellipticity(&self) -> f64 {
        let ev = self.eigenvalues();
        if ev[0] <= 0.0 {
            return ev[0];
        }
        ev[0].min(1.0 / ev[2])
    }

    /// `R A R` with `R = diag(1, 1, -1)`.
    pub fn reflect(&self) -> Self {
        let e = self.entries;
        Self::new(e[0], e[1], e[2], e[3], -e[4], -e[5])
    }

    /// Congruence `M A Mᵀ`.
    pub fn congruence(&self, m: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(m * self.to_matrix() * m.transpose()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|a| a.is_finite())
    }
}
