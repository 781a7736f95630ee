//! Semi-Lagrangian free transport `∂_t f + v3 ∂_{x3} f = 0` with ε-relaxed
//! specular walls.
//!
//! The slab is unfolded into a periodic line of length `2L`: a cell reached
//! across `k` walls is the folded cell sampled at `R^k v` and damped by
//! `(1 - ε)^k`. The step interpolates that unfolded field linearly at the
//! foot `x - v3 Δt`. With `ε = 0` it is a shift on the periodic line:
//! constants are fixed, mass is conserved and `Σ f²` never grows.

use serde::{Deserialize, Serialize};

use super::domain::PhaseField;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

pub const MAX_BOUNCES: usize = 8;

/// Where a backward characteristic from `(x, v)` lands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Foot {
    pub x: f64,
    pub bounces: usize,
    /// Whether the sampled velocity is `R v` (odd number of bounces).
    pub flipped: bool,
}

/// Trace `x - v3 Δt` with specular reflection off `0` and `L`.
pub fn trace_foot(x: f64, v3: f64, dt: f64, length: f64) -> Result<Foot> {
    let mut p = x - v3 * dt;
    let mut bounces = 0;
    while !(0.0..=length).contains(&p) {
        p = if p < 0.0 { -p } else { 2.0 * length - p };
        bounces += 1;
        if bounces > MAX_BOUNCES {
            return Err(Error::StepSize(format!(
                "characteristic from x = {x} with v3 = {v3} bounces more than {MAX_BOUNCES} times in Δt = {dt}"
            )));
        }
    }
    Ok(Foot {
        x: p,
        bounces,
        flipped: bounces % 2 == 1,
    })
}

/// Wall samples of one transport step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Trace at `x3 = 0` for every node; incoming there means `v3 > 0`.
    pub left: Vec<f64>,
    /// Trace at `x3 = L`; incoming there means `v3 < 0`.
    pub right: Vec<f64>,
    pub epsilon: f64,
}

impl TraceRecord {
    /// `max |f₋(v) - (1 - ε) f₊(R v)|` over both walls.
    pub fn bc_residual(&self, grid: &VelocityGrid) -> f64 {
        let keep = 1.0 - self.epsilon;
        let mut r = 0.0_f64;
        for i in 0..grid.len() {
            let v3 = grid.node(i)[2];
            let j = grid.reflect_index(i);
            if v3 > 0.0 {
                r = r.max((self.left[i] - keep * self.left[j]).abs());
            } else if v3 < 0.0 {
                r = r.max((self.right[i] - keep * self.right[j]).abs());
            }
        }
        r
    }
}

/// Value of the unfolded field at cell index `k` of the doubled periodic line.
///
/// Index `-1` is the ghost behind `x3 = 0` and `cells` the ghost behind `L`.
/// Every wall between cell `k` and the slab flips `v3` and costs a factor `keep`.
fn unfolded_value(f: &PhaseField, i: usize, k: i64, keep: f64) -> f64 {
    let nc = f.slab.cells() as i64;
    let m = k.rem_euclid(2 * nc);
    let cell = if m < nc { m } else { 2 * nc - 1 - m } as usize;
    let bounces = k.div_euclid(nc).unsigned_abs();
    let j = if bounces % 2 == 1 { f.grid.reflect_index(i) } else { i };
    let value = f.values[cell * f.grid.len() + j];
    if bounces == 0 {
        value
    } else {
        keep.powi(bounces as i32) * value
    }
}

fn transported_value(f: &PhaseField, x: f64, i: usize, dt: f64, keep: f64) -> f64 {
    let v3 = f.grid.node(i)[2];
    let s = (x - v3 * dt) / f.slab.dx() - 0.5;
    let c0 = s.floor();
    let w = s - c0;
    let left = unfolded_value(f, i, c0 as i64, keep);
    if w == 0.0 {
        return left;
    }
    left + w * (unfolded_value(f, i, c0 as i64 + 1, keep) - left)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Config(format!("wall relaxation ε must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

/// Advance `f` by free transport over `dt`.
pub fn transport_step(f: &PhaseField, dt: f64, epsilon: f64) -> Result<PhaseField> {
    check_epsilon(epsilon)?;
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be nonnegative, got {dt}")));
    }
    // the bounce limit only depends on the fastest node and the slab
    let vmax = f.grid.half_width();
    trace_foot(f.slab.length(), vmax, dt, f.slab.length())?;
    trace_foot(0.0, -vmax, dt, f.slab.length())?;
    let n = f.grid.len();
    let keep = 1.0 - epsilon;
    let mut values = vec![0.0; f.values.len()];
    for (c, chunk) in values.chunks_mut(n).enumerate() {
        let x = f.slab.center(c);
        for (i, out) in chunk.iter_mut().enumerate() {
            *out = transported_value(f, x, i, dt, keep);
        }
    }
    PhaseField::new(f.slab, f.grid, values, f.t + dt)
}

/// Boundary layer of `f` as seen by the next transport step: outgoing
/// traces are first-cell values, incoming traces are the ghost values.
pub fn wall_traces(f: &PhaseField, epsilon: f64) -> Result<TraceRecord> {
    check_epsilon(epsilon)?;
    let grid = f.grid;
    let keep = 1.0 - epsilon;
    let nc = f.slab.cells() as i64;
    let side = |inside: i64, ghost: i64, incoming: fn(f64) -> bool| -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let k = if incoming(grid.node(i)[2]) { ghost } else { inside };
                unfolded_value(f, i, k, keep)
            })
            .collect()
    };
    Ok(TraceRecord {
        left: side(0, -1, |v3| v3 > 0.0),
        right: side(nc - 1, nc, |v3| v3 < 0.0),
        epsilon,
    })
}

/// `Σ_{v3 ≠ 0} f(first cell, v)^m ⟨v⟩^θ |v3| h³` over outgoing nodes at both walls,
/// for `m ∈ {1, 2}`.
pub fn outgoing_flux(f: &PhaseField, weights: &[f64], power: i32) -> f64 {
    let grid = f.grid;
    let nc = f.slab.cells();
    let h3 = grid.spacing().powi(3);
    let mut s = 0.0;
    for i in 0..grid.len() {
        let v3 = grid.node(i)[2];
        let value = if v3 < 0.0 {
            f.cell(0)[i]
        } else if v3 > 0.0 {
            f.cell(nc - 1)[i]
        } else {
            continue;
        };
        s += value.powi(power) * weights[i] * v3.abs();
    }
    s * h3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slab::SlabDomain;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (SlabDomain, VelocityGrid) {
        (SlabDomain::new(1.0, 8).unwrap(), VelocityGrid::new(2.0, 5).unwrap())
    }

    fn random_field(seed: u64) -> PhaseField {
        let (slab, grid) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..slab.cells() * grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PhaseField::new(slab, grid, values, 0.0).unwrap()
    }

    #[test]
    fn foot_examples() {
        let f = trace_foot(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(f.bounces, 1);
        assert!(f.flipped);
        assert!((f.x - 0.5).abs() < 1e-15);
        let g = trace_foot(0.2, -1.0, 1.0, 1.0).unwrap();
        assert_eq!(g.bounces, 1);
        assert!((g.x - 0.8).abs() < 1e-15);
        assert_eq!(trace_foot(0.3, 0.0, 5.0, 1.0).unwrap().bounces, 0);
        assert!(matches!(trace_foot(0.5, 1.0, 9.0, 1.0), Err(Error::StepSize(_))));
    }

    #[test]
    fn constants_are_fixed() {
        let (slab, grid) = setup();
        let c = PhaseField::from_fn(slab, grid, |_, _| 2.5);
        for dt in [0.01, 0.13, 0.5, 1.7] {
            let out = transport_step(&c, dt, 0.0).unwrap();
            assert!(out.values.iter().all(|&x| x == 2.5), "dt = {dt}");
        }
    }

    #[test]
    fn full_absorption_empties_incoming_traces() {
        let f = random_field(1);
        let tr = wall_traces(&transport_step(&f, 0.05, 1.0).unwrap(), 1.0).unwrap();
        let grid = f.grid;
        for i in 0..grid.len() {
            let v3 = grid.node(i)[2];
            if v3 > 0.0 {
                assert_eq!(tr.left[i], 0.0);
            }
            if v3 < 0.0 {
                assert_eq!(tr.right[i], 0.0);
            }
        }
        assert_eq!(tr.bc_residual(&grid), 0.0);
    }

    #[test]
    fn boundary_condition_holds_by_construction() {
        let f = random_field(2);
        for eps in [0.0, 0.1, 0.5] {
            let tr = wall_traces(&transport_step(&f, 0.07, eps).unwrap(), eps).unwrap();
            assert!(tr.bc_residual(&f.grid) <= 1e-14);
        }
    }

    #[test]
    fn cfl_one_shift_is_exact() {
        // with |v3| Δt a whole number of cells, the step permutes values
        let (slab, grid) = setup();
        let f = random_field(3);
        let dt = slab.dx() / grid.spacing();
        let out = transport_step(&f, dt, 0.0).unwrap();
        let n = grid.len();
        for i in 0..n {
            if grid.node(i)[2] == grid.spacing() {
                for c in 1..slab.cells() {
                    assert!((out.values[c * n + i] - f.values[(c - 1) * n + i]).abs() < 1e-14);
                }
                assert!((out.values[i] - f.values[grid.reflect_index(i)]).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn specular_transport_conserves_mass_and_contracts(seed in 0u64..500, dt in 0.0..0.6_f64) {
            let f = random_field(seed);
            let out = transport_step(&f, dt, 0.0).unwrap();
            let m = |g: &PhaseField| g.values.iter().sum::<f64>();
            let e = |g: &PhaseField| g.values.iter().map(|x| x * x).sum::<f64>();
            prop_assert!((m(&f) - m(&out)).abs() < 1e-11);
            prop_assert!(e(&out) <= e(&f) * (1.0 + 1e-13));
            prop_assert!(out.max_abs() <= f.max_abs() * (1.0 + 1e-14));
        }

        #[test]
        fn absorption_only_loses_mass(seed in 0u64..500, dt in 0.01..0.6_f64, eps in 0.0..1.0_f64) {
            let f = random_field(seed).values.iter().map(|x| x.abs()).collect::<Vec<_>>();
            let (slab, grid) = setup();
            let f = PhaseField::new(slab, grid, f, 0.0).unwrap();
            let out = transport_step(&f, dt, eps).unwrap();
            let m = |g: &PhaseField| g.values.iter().sum::<f64>();
            prop_assert!(m(&out) <= m(&f) * (1.0 + 1e-13));
            prop_assert!(out.values.iter().all(|&x| x >= 0.0));
        }
    }
}
