//! Pointwise convolution `∫ Φ(v - v') f(v') dv'` on a lattice through `v`.

use serde::{Deserialize, Serialize};

use super::kernel::{phi_unchecked, LATTICE_ZETA};
use crate::sym::{SymMatrix3, Vec3};

/// Lattice `v + h Z³` restricted to the box `[-V, V]³`, `h = 2V/cells`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointQuadrature {
    pub half_width: f64,
    pub cells: usize,
}

/// Convolution value with the largest integrand magnitude on the box faces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConvolution {
    pub value: SymMatrix3,
    pub tail: f64,
}

impl PointQuadrature {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    /// `Σ_{m≠0} h³ Φ(mh) f(v + mh) + (2/3) ζ h² f(v) I`.
    pub fn phi_convolve(&self, v: &Vec3, f: impl Fn(&Vec3) -> f64) -> PointConvolution {
        let h = self.spacing();
        let big = self.half_width;
        let range = |c: f64| {
            let lo = ((-big - c) / h - 1e-9).ceil() as i64;
            let hi = ((big - c) / h + 1e-9).floor() as i64;
            (lo, hi)
        };
        let r: [(i64, i64); 3] = [range(v[0]), range(v[1]), range(v[2])];
        let mut acc = [0.0; 6];
        let mut tail = 0.0_f64;
        let h3 = h * h * h;
        for m0 in r[0].0..=r[0].1 {
            for m1 in r[1].0..=r[1].1 {
                for m2 in r[2].0..=r[2].1 {
                    let d = [m0 as f64 * h, m1 as f64 * h, m2 as f64 * h];
                    let p = [v[0] + d[0], v[1] + d[1], v[2] + d[2]];
                    let fv = f(&p);
                    let face = [m0, m1, m2]
                        .iter()
                        .zip(&r)
                        .any(|(&m, &(lo, hi))| m == lo || m == hi);
                    if face {
                        tail = tail.max(fv.abs());
                    }
                    if m0 == 0 && m1 == 0 && m2 == 0 {
                        let w = 2.0 / 3.0 * LATTICE_ZETA * h * h * fv;
                        acc[0] += w;
                        acc[1] += w;
                        acc[2] += w;
                        continue;
                    }
                    let k = phi_unchecked(&d);
                    for (a, e) in acc.iter_mut().zip(k.entries.iter()) {
                        *a += h3 * e * fv;
                    }
                }
            }
        }
        PointConvolution {
            value: SymMatrix3 { entries: acc },
            tail,
        }
    }
}
