//! The Landau kernel `Φ(v) = (I - v̂ v̂ᵀ)/|v|`, the Maxwellian, and lattice
//! quadrature weights for the singular kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sym::{dot, SymMatrix3, Vec3};

/// `-ζ(1/2)` for the Epstein zeta function of the cubic lattice `Z³`.
///
/// A lattice sum `Σ_{m≠0} h³ u(mh)/|mh|` misses `LATTICE_ZETA·h²·u(0)` of the
/// integral, so this is the weight given to the singular node.
pub const LATTICE_ZETA: f64 = 2.837_297_479_480_63;

pub fn kernel_phi(v: &Vec3) -> Result<SymMatrix3> {
    if dot(v, v) == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(phi_unchecked(v))
}

#[inline]
pub(crate) fn phi_unchecked(v: &Vec3) -> SymMatrix3 {
    let r2 = dot(v, v);
    let r = r2.sqrt();
    let inv = 1.0 / r;
    let c = inv / r2;
    SymMatrix3::new(
        inv - v[0] * v[0] * c,
        inv - v[1] * v[1] * c,
        inv - v[2] * v[2] * c,
        -v[0] * v[1] * c,
        -v[0] * v[2] * c,
        -v[1] * v[2] * c,
    )
}

/// Entry `(i, j)` of `Φ(v)`.
#[inline]
pub(crate) fn phi_entry(v: &Vec3, i: usize, j: usize) -> f64 {
    let r2 = dot(v, v);
    let r = r2.sqrt();
    let d = if i == j { 1.0 } else { 0.0 };
    (d - v[i] * v[j] / r2) / r
}

/// Lattice weight of `Φ^{ij}` at integer offset `m` with spacing `h`.
pub(crate) fn phi_weight(m: [i64; 3], h: f64, i: usize, j: usize) -> f64 {
    if m == [0, 0, 0] {
        return if i == j { 2.0 / 3.0 * LATTICE_ZETA * h * h } else { 0.0 };
    }
    let v = [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h];
    h * h * h * phi_entry(&v, i, j)
}

/// Lattice weight of the odd kernel `∂_i Φ^{ij} = -2 v_j/|v|³`, punctured at the origin.
pub(crate) fn div_phi_weight(m: [i64; 3], h: f64, j: usize) -> f64 {
    if m == [0, 0, 0] {
        return 0.0;
    }
    let v = [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h];
    let r2 = dot(&v, &v);
    h * h * h * (-2.0 * v[j] / (r2 * r2.sqrt()))
}

/// `μ(v) = π^{-3/2} e^{-|v|²}`.
#[inline]
pub fn maxwellian(v: &Vec3) -> f64 {
    PI.powf(-1.5) * (-dot(v, v)).exp()
}

/// `μ^{1/2}`.
#[inline]
pub fn sqrt_maxwellian(v: &Vec3) -> f64 {
    PI.powf(-0.75) * (-0.5 * dot(v, v)).exp()
}

/// `σ(0) = (4/3) π^{-1/2} I`.
pub fn sigma_at_origin() -> f64 {
    4.0 / (3.0 * PI.sqrt())
}
