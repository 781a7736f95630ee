//! Finite-stencil representation `a = Σ_k λ_k l_k l_kᵀ` of symmetric matrices.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::StencilDirection;
use crate::sym::SymMatrix3;

/// Axis pairs in stencil order; pair `p` owns directions `3 + 2p` (`e_i + e_j`) and `4 + 2p` (`e_i - e_j`).
const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// The nine directions `e_1, e_2, e_3, e_1 ± e_2, e_1 ± e_3, e_2 ± e_3`.
pub fn default_stencil() -> Vec<StencilDirection> {
    let mut dirs: Vec<StencilDirection> = (0..3).map(StencilDirection::basis).collect();
    for (i, j) in PAIRS {
        for s in [1, -1] {
            let mut l = [0; 3];
            l[i] = 1;
            l[j] = s;
            dirs.push(StencilDirection(l));
        }
    }
    dirs
}

/// Directions, weights and the weight floor `δ₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilDecomposition {
    pub dirs: Vec<StencilDirection>,
    pub weights: Vec<f64>,
    pub delta1: f64,
}

impl StencilDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Closed-form weights on the default stencil, without validation.
pub fn stencil_weights(a: &SymMatrix3, delta1: f64) -> [f64; 9] {
    let mut w = [0.0; 9];
    let mut used = [0.0; 3];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let aij = a.get(i, j);
        let plus = 0.5 * aij.abs() + 0.5 * aij + delta1;
        let minus = 0.5 * aij.abs() - 0.5 * aij + delta1;
        w[3 + 2 * p] = plus;
        w[4 + 2 * p] = minus;
        used[i] += plus + minus;
        used[j] += plus + minus;
    }
    for i in 0..3 {
        w[i] = a.get(i, i) - used[i];
    }
    w
}

/// Decompose `a ∈ Sym(δ)` with floor `delta1 ∈ [0, δ/8]`.
///
/// `delta1 = 0` is a diagnostic mode in which pair weights may vanish.
pub fn decompose(a: &SymMatrix3, delta: f64, delta1: f64) -> Result<StencilDecomposition> {
    check_sym(a, delta)?;
    if !(delta1 >= 0.0 && delta1 <= delta / 8.0 * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "delta1 = {delta1} outside [0, delta/8] with delta = {delta}"
        )));
    }
    Ok(StencilDecomposition {
        dirs: default_stencil(),
        weights: stencil_weights(a, delta1).to_vec(),
        delta1,
    })
}

/// [`decompose`] with the default floor `δ₁ = δ/8`.
pub fn decompose_default(a: &SymMatrix3, delta: f64) -> Result<StencilDecomposition> {
    decompose(a, delta, delta / 8.0)
}

/// Check `δ|ξ|² ≤ ξᵀaξ ≤ δ⁻¹|ξ|²` through the extreme eigenvalues.
pub fn check_sym(a: &SymMatrix3, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("ellipticity {delta} outside (0, 1]")));
    }
    if !a.is_finite() {
        return Err(Error::Ellipticity {
            delta,
            detail: "non-finite entries".into(),
        });
    }
    let ev = a.eigenvalues();
    let tol = 1e-12 * (1.0 + ev[2].abs());
    if ev[0] < delta - tol || ev[2] > 1.0 / delta + tol {
        return Err(Error::Ellipticity {
            delta,
            detail: format!("eigenvalues span [{}, {}]", ev[0], ev[2]),
        });
    }
    Ok(())
}

/// `Σ_k λ_k l_k l_kᵀ`.
pub fn reconstruct(d: &StencilDecomposition) -> SymMatrix3 {
    d.dirs
        .iter()
        .zip(&d.weights)
        .fold(SymMatrix3::zero(), |acc, (l, &w)| {
            acc.add(&SymMatrix3::outer(&l.as_vec3()).scale(w))
        })
}

/// Sign structure of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// `(direction, weight)` for every negative weight.
    pub negative: Vec<(StencilDirection, f64)>,
    pub min_weight: f64,
    /// All weights are at least `δ₁`.
    pub monotone: bool,
}

pub fn monotonicity_report(d: &StencilDecomposition) -> MonotonicityReport {
    let negative = d
        .dirs
        .iter()
        .zip(&d.weights)
        .filter(|(_, &w)| w < 0.0)
        .map(|(l, &w)| (*l, w))
        .collect();
    let min_weight = d.weights.iter().copied().fold(f64::INFINITY, f64::min);
    MonotonicityReport {
        negative,
        min_weight,
        monotone: d.weights.iter().all(|&w| w >= d.delta1),
    }
}

/// Random matrix with eigenvalues drawn strictly inside `[δ, δ⁻¹]`.
pub fn random_sym<R: Rng + ?Sized>(rng: &mut R, delta: f64) -> SymMatrix3 {
    let lo = delta * (1.0 + 1e-6);
    let hi = (1.0 - 1e-6) / delta;
    let ev = Vector3::from_fn(|_, _| rng.gen_range(lo..hi));
    let g = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    SymMatrix3::from_matrix(&(q * Matrix3::from_diagonal(&ev) * q.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_stencil_layout() {
        let s = default_stencil();
        assert_eq!(s.len(), 9);
        for (i, j) in PAIRS {
            for sign in [1, -1] {
                let count = s
                    .iter()
                    .filter(|l| {
                        let mut p = [0; 3];
                        p[i] = 1;
                        p[j] = sign;
                        l.0 == p || l.neg().0 == p
                    })
                    .count();
                assert_eq!(count, 1);
            }
        }
    }

    #[test]
    fn rank_one_outer_products_span_symmetric_matrices() {
        let s = default_stencil();
        let m = DMatrix::from_fn(9, 6, |r, c| SymMatrix3::outer(&s[r].as_vec3()).entries[c]);
        assert_eq!(m.rank(1e-10), 6);
    }

    #[test]
    fn identity_decomposition() {
        let d = decompose(&SymMatrix3::identity(), 0.5, 0.0625).unwrap();
        for k in 0..3 {
            assert!((d.weights[k] - 0.75).abs() < 1e-15);
        }
        for k in 3..9 {
            assert!((d.weights[k] - 0.0625).abs() < 1e-15);
        }
        assert!(reconstruct(&d).sub(&SymMatrix3::identity()).max_abs() < 1e-12);
        let r = monotonicity_report(&d);
        assert!(r.monotone);
        assert_eq!(r.min_weight, 0.0625);
    }

    #[test]
    fn scaled_identity_basis_weights() {
        let delta = 0.4;
        let d1 = delta / 8.0;
        let d = decompose(&SymMatrix3::scaled_identity(delta), delta, d1).unwrap();
        for k in 0..3 {
            assert!((d.weights[k] - (delta - 4.0 * d1)).abs() < 1e-15);
        }
        let r = monotonicity_report(&decompose(&SymMatrix3::identity(), 0.5, d1).unwrap());
        assert!((r.min_weight - (1.0 - 4.0 * d1).min(d1)).abs() < 1e-15);
    }

    #[test]
    fn large_offdiagonal_gives_negative_basis_weight() {
        let delta = 0.2;
        // eigenvalues of [[δ', c],[c, 5]] stay in [0.2, 5] for this choice
        let a = SymMatrix3::new(0.5, 4.0, 1.0, 1.0, 0.0, 0.0);
        let d = decompose_default(&a, delta).unwrap();
        let r = monotonicity_report(&d);
        assert!(!r.monotone);
        assert_eq!(r.negative.len(), 1);
        assert_eq!(r.negative[0].0, StencilDirection::basis(0));
        assert!((r.negative[0].1 - (0.5 - 1.0 - 4.0 * delta / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn single_pair_weight_reconstructs_rank_one() {
        let mut w = vec![0.0; 9];
        w[3] = 1.0;
        let m = reconstruct(&StencilDecomposition {
            dirs: default_stencil(),
            weights: w,
            delta1: 0.0,
        });
        assert_eq!(m, SymMatrix3::new(1.0, 1.0, 0.0, 1.0, 0.0, 0.0));
        let z = reconstruct(&StencilDecomposition {
            dirs: default_stencil(),
            weights: vec![0.0; 9],
            delta1: 0.0,
        });
        assert_eq!(z, SymMatrix3::zero());
    }

    #[test]
    fn rejects_non_elliptic_and_bad_floor() {
        let bad = SymMatrix3::diag([1.0, 0.01, 1.0]);
        assert!(matches!(decompose_default(&bad, 0.2), Err(Error::Ellipticity { .. })));
        assert!(matches!(
            decompose(&SymMatrix3::identity(), 0.5, 0.1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn thousand_random_matrices_reconstruct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_sym(&mut rng, 0.2);
            let d = decompose_default(&a, 0.2).unwrap();
            assert!(reconstruct(&d).sub(&a).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let d = decompose_default(&SymMatrix3::identity(), 0.5).unwrap();
        let s = d.to_json();
        assert!(s.contains("\"dirs\":[[1,0,0]"));
        assert_eq!(StencilDecomposition::from_json(&s).unwrap(), d);
    }

    proptest! {
        #[test]
        fn pair_weights_bounded_below(seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, 0.2);
            let d = decompose_default(&a, 0.2).unwrap();
            for &w in &d.weights[3..] {
                prop_assert!(w >= d.delta1);
            }
        }

        #[test]
        fn weights_linear_for_nonnegative_entries(x in proptest::array::uniform6(0.0f64..2.0),
                                                  y in proptest::array::uniform6(0.0f64..2.0)) {
            let a = SymMatrix3 { entries: x };
            let b = SymMatrix3 { entries: y };
            let wa = stencil_weights(&a, 0.0);
            let wb = stencil_weights(&b, 0.0);
            let wab = stencil_weights(&a.add(&b), 0.0);
            for k in 0..9 {
                prop_assert!((wab[k] - wa[k] - wb[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn weights_lipschitz_in_entries(seed in 0u64..10_000, eta in 1e-6f64..1e-2) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, 0.2);
            let mut p = a;
            for e in p.entries.iter_mut() {
                *e += eta * rng.gen_range(-1.0..1.0);
            }
            let wa = stencil_weights(&a, 0.025);
            let wp = stencil_weights(&p, 0.025);
            for k in 0..9 {
                prop_assert!((wa[k] - wp[k]).abs() <= 3.0 * eta + 1e-15);
            }
        }
    }
}
