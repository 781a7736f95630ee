//! Matrix-free Krylov helpers for symmetric per-cell systems.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `‖r‖ / ‖rhs‖`.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for `M x = rhs`, warm-started from `x`.
///
/// Fails if a search direction has `pᵀ M p ≤ 0` or the tolerance is not met
/// within `max_iter`; the message carries the smallest Rayleigh quotient seen,
/// an upper bound for the smallest eigenvalue of `M`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = rhs.len();
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Solver(format!("non-positive diagonal {} at node {i}", diag[i])));
    }
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut eig_estimate = f64::INFINITY;
    for it in 0..=max_iter {
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rel,
            });
        }
        if it == max_iter {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        let pp = dot(&p, &p);
        eig_estimate = eig_estimate.min(pap / pp);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!(
                "system is not positive definite: pᵀMp = {pap:.3e}, eigmin ≤ {eig_estimate:.3e}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "CG did not reach relative residual {tol:.1e} in {max_iter} iterations; eigmin ≤ {eig_estimate:.3e}"
    )))
}

/// Extreme eigenvalue estimates `(min, max)` of a symmetric operator from
/// `steps` Lanczos iterations with full reorthogonalization.
pub fn lanczos_extremes(apply: impl Fn(&[f64], &mut [f64]), start: &[f64], steps: usize) -> Result<(f64, f64)> {
    let n = start.len();
    let norm0 = dot(start, start).sqrt();
    if norm0 == 0.0 || steps == 0 {
        return Err(Error::Precondition("Lanczos needs a nonzero start vector and at least one step".into()));
    }
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm0).collect()];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    for k in 0..steps.min(n) {
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alphas.push(a);
        for q in &basis {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let b = dot(&w, &w).sqrt();
        if b < 1e-12 * a.abs().max(1.0) || k + 1 == steps.min(n) {
            break;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let ev = SymmetricEigen::new(t).eigenvalues;
    Ok((ev.min(), ev.max()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            out[i] = 2.0 * x[i] - l - r;
        }
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut x = vec![0.0; n];
        let out = pcg(laplacian_1d, &vec![2.0; n], &rhs, &mut x, 1e-12, 10 * n).unwrap();
        assert!(out.iterations <= n + 1);
        let mut ax = vec![0.0; n];
        laplacian_1d(&x, &mut ax);
        let err = ax.iter().zip(&rhs).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10);
    }

    #[test]
    fn cg_rejects_indefinite() {
        let rhs = vec![1.0, 1.0];
        let indefinite = |x: &[f64], o: &mut [f64]| {
            o[0] = x[1];
            o[1] = x[0];
        };
        let err = pcg(indefinite, &[1.0, 1.0], &rhs, &mut [1.0, -1.0], 1e-10, 20);
        assert!(matches!(err, Err(Error::Solver(_))));
    }

    #[test]
    fn lanczos_finds_laplacian_spectrum() {
        let n = 40;
        let start: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let (lo, hi) = lanczos_extremes(laplacian_1d, &start, n).unwrap();
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        assert!((lo - (2.0 - 2.0 * h.cos())).abs() < 1e-9);
        assert!((hi - (2.0 + 2.0 * h.cos())).abs() < 1e-9);
    }
}
