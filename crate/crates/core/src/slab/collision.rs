//! Velocity-space part of a split step, solved independently in every cell.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::PhaseField;
use super::linalg::{lanczos_extremes, pcg};
use crate::error::{Error, Result};
use crate::grid::{AhOperator, FluxBoundary, GridField, StencilDirection, VelocityGrid};
use crate::landau::{central_gradient, sqrt_maxwellian, LandauCoefficientSet};
use crate::stencil::{check_sym, default_stencil, stencil_weights};
use crate::sym::{SymMatrix3, Vec3};

pub type SourceFn = dyn Fn(f64, f64, &Vec3) -> f64 + Send + Sync;

/// Right-hand side `𝗀(t, x3, v)`.
#[derive(Clone, Default)]
pub enum SourceTerm {
    #[default]
    Zero,
    Constant(f64),
    Function(Arc<SourceFn>),
}

impl std::fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SourceTerm::Zero => write!(f, "Zero"),
            SourceTerm::Constant(c) => write!(f, "Constant({c})"),
            SourceTerm::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl SourceTerm {
    pub fn sample(&self, t: f64, x: f64, grid: &VelocityGrid) -> Vec<f64> {
        match self {
            SourceTerm::Zero => vec![0.0; grid.len()],
            SourceTerm::Constant(c) => vec![*c; grid.len()],
            SourceTerm::Function(g) => (0..grid.len()).map(|i| g(t, x, &grid.node(i))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceTerm::Zero) || matches!(self, SourceTerm::Constant(c) if *c == 0.0)
    }
}

/// Kinetic Fokker-Planck coefficients `a(v)`, `b(v)` and their monotone stencil.
#[derive(Clone, Debug)]
pub struct KfpModel {
    a_h: AhOperator,
    b: Vec<Vec3>,
    delta: f64,
    delta1: f64,
    min_weight: f64,
}

impl KfpModel {
    /// Per-node `a ∈ Sym(δ)` and drift `b`; the stencil floor defaults to `δ/8`.
    pub fn new(grid: VelocityGrid, a: &[SymMatrix3], b: &[Vec3], delta: f64, delta1: Option<f64>) -> Result<Self> {
        if a.len() != grid.len() || b.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} diffusion and {} drift values for {} nodes",
                a.len(),
                b.len(),
                grid.len()
            )));
        }
        let delta1 = delta1.unwrap_or(delta / 8.0);
        if !(delta1 >= 0.0 && delta1 <= delta / 8.0 * (1.0 + 1e-12)) {
            return Err(Error::Config(format!("δ₁ = {delta1} outside [0, δ/8] with δ = {delta}")));
        }
        if let Some(i) = b.iter().position(|x| x.iter().any(|c| !c.is_finite())) {
            return Err(Error::Data(format!("non-finite drift at node {i}")));
        }
        let dirs = default_stencil();
        let mut raw = vec![vec![0.0; grid.len()]; dirs.len()];
        let mut min_weight = f64::INFINITY;
        for (i, ai) in a.iter().enumerate() {
            check_sym(ai, delta)?;
            for (k, w) in stencil_weights(ai, delta1).into_iter().enumerate() {
                raw[k][i] = w;
                min_weight = min_weight.min(w);
            }
        }
        Ok(Self {
            a_h: AhOperator::from_raw(grid, dirs, raw, FluxBoundary::NoFlux),
            b: b.to_vec(),
            delta,
            delta1,
            min_weight,
        })
    }

    pub fn from_fn(
        grid: VelocityGrid,
        a: impl Fn(&Vec3) -> SymMatrix3,
        b: impl Fn(&Vec3) -> Vec3,
        delta: f64,
        delta1: Option<f64>,
    ) -> Result<Self> {
        let nodes: Vec<Vec3> = (0..grid.len()).map(|i| grid.node(i)).collect();
        let av: Vec<SymMatrix3> = nodes.iter().map(&a).collect();
        let bv: Vec<Vec3> = nodes.iter().map(&b).collect();
        Self::new(grid, &av, &bv, delta, delta1)
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.a_h.grid()
    }

    pub fn operator(&self) -> &AhOperator {
        &self.a_h
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    /// All stencil weights nonnegative, so the explicit scheme is monotone under its CFL bound.
    pub fn is_monotone(&self) -> bool {
        self.min_weight >= 0.0
    }

    pub fn max_drift(&self) -> f64 {
        self.b.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Upwinded `b · δ_h f`: backward differences where `b_i > 0`, forward where
    /// `b_i < 0`, and zero across the box faces.
    pub fn drift(&self, f: &[f64]) -> Vec<f64> {
        let grid = self.grid();
        let h = grid.spacing();
        (0..grid.len())
            .map(|idx| {
                let mut s = 0.0;
                for i in 0..3 {
                    let bi = self.b[idx][i];
                    if bi == 0.0 {
                        continue;
                    }
                    let l = StencilDirection::basis(i);
                    let d = if bi > 0.0 {
                        grid.neighbor(idx, &l.neg()).map_or(0.0, |j| f[idx] - f[j])
                    } else {
                        grid.neighbor(idx, &l).map_or(0.0, |j| f[j] - f[idx])
                    };
                    s += bi * d / h;
                }
                s
            })
            .collect()
    }

    fn drift_rate(&self) -> f64 {
        let h = self.grid().spacing();
        self.b
            .iter()
            .map(|b| b.iter().map(|x| x.abs()).sum::<f64>() / h)
            .fold(0.0, f64::max)
    }
}

/// Viscous linearized Landau operator `∇·((σ_G + ν I)∇f) + a_g·∇f + K̄_g f`.
#[derive(Debug)]
pub struct LandauModel {
    coeffs: Arc<LandauCoefficientSet>,
    nu: f64,
    /// `A_h[σ_G + ν I]`, treated implicitly.
    a_h: AhOperator,
    min_weight: f64,
}

fn nodewise_operator(grid: VelocityGrid, m: &[SymMatrix3]) -> Result<(AhOperator, f64)> {
    let dirs = default_stencil();
    let mut raw = vec![vec![0.0; grid.len()]; dirs.len()];
    let mut min_weight = f64::INFINITY;
    for (i, mi) in m.iter().enumerate() {
        let delta = mi.eigenvalues()[0];
        if !(delta > 0.0) {
            return Err(Error::Ellipticity {
                delta,
                detail: format!("diffusion matrix is not positive definite at node {i}"),
            });
        }
        for (k, w) in stencil_weights(mi, delta / 8.0).into_iter().enumerate() {
            raw[k][i] = w;
            min_weight = min_weight.min(w);
        }
    }
    Ok((AhOperator::from_raw(grid, dirs, raw, FluxBoundary::NoFlux), min_weight))
}

impl LandauModel {
    pub fn new(coeffs: Arc<LandauCoefficientSet>, nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be nonnegative, got {nu}")));
        }
        let m: Vec<SymMatrix3> = coeffs
            .sigma_g
            .iter()
            .map(|s| s.add(&SymMatrix3::scaled_identity(nu)))
            .collect();
        let (a_h, min_weight) = nodewise_operator(coeffs.grid, &m)?;
        Ok(Self {
            coeffs,
            nu,
            a_h,
            min_weight,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.a_h.grid()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn coefficients(&self) -> &LandauCoefficientSet {
        &self.coeffs
    }

    pub fn operator(&self) -> &AhOperator {
        &self.a_h
    }

    pub fn min_weight(&self) -> f64 {
        self.min_weight
    }

    fn gradient(&self, f: &[f64]) -> [Vec<f64>; 3] {
        let field = GridField {
            grid: *self.grid(),
            values: f.to_vec(),
            exterior: Default::default(),
        };
        central_gradient(&field).map(|g| g.values)
    }

    /// Lagged part `a_g · ∇f + K̄_g f`.
    pub fn explicit_terms(&self, f: &[f64]) -> Result<Vec<f64>> {
        let grad = self.gradient(f);
        let mut out = self.coeffs.apply_kbar(f, &grad)?;
        for (i, o) in out.iter_mut().enumerate() {
            let a = &self.coeffs.a_g[i];
            *o += a[0] * grad[0][i] + a[1] * grad[1][i] + a[2] * grad[2][i];
        }
        Ok(out)
    }

    /// `Σ (σ^{ij} ∂_i f ∂_j f + σ^{ij} v_i v_j f²) h³` with central differences.
    pub fn sigma_energy(&self, f: &[f64]) -> f64 {
        let grid = self.grid();
        let grad = self.gradient(f);
        let ones = vec![1.0; grid.len()];
        crate::norms::sigma_weighted_energy(f, &grad, grid, &self.coeffs.sigma, &ones)
    }

    /// `S_op f` with `⟨S_op f, f⟩ h³ =` [`Self::sigma_energy`].
    fn sigma_operator(&self, f: &[f64]) -> Vec<f64> {
        let grid = *self.grid();
        let sigma = &self.coeffs.sigma;
        let grad = self.gradient(f);
        let flux: [Vec<f64>; 3] = std::array::from_fn(|a| {
            (0..grid.len())
                .map(|i| (0..3).map(|b| sigma[i].get(a, b) * grad[b][i]).sum())
                .collect()
        });
        let mut out: Vec<f64> = (0..grid.len()).map(|i| sigma[i].quad(&grid.node(i)) * f[i]).collect();
        for (a, fa) in flux.iter().enumerate() {
            let d = self.gradient(fa);
            for i in 0..grid.len() {
                out[i] -= d[a][i];
            }
        }
        out
    }

    /// `L⁰ f = -A_h[σ_G] f - a_g·∇f - K̄_g f`, the operator without viscosity.
    fn l0(&self, f: &[f64], inviscid: &AhOperator) -> Result<Vec<f64>> {
        let a = inviscid.apply(f);
        let e = self.explicit_terms(f)?;
        Ok(a.iter().zip(&e).map(|(x, y)| -x - y).collect())
    }

    fn inviscid_operator(&self) -> Result<AhOperator> {
        Ok(nodewise_operator(*self.grid(), &self.coeffs.sigma_g)?.0)
    }

    /// `⟨L⁰ f, f⟩ h³` per cell.
    pub fn l0_form(&self, f: &[f64]) -> Result<f64> {
        let op = self.inviscid_operator()?;
        let h3 = self.grid().spacing().powi(3);
        Ok(self.l0(f, &op)?.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() * h3)
    }

    /// Smallest `N₀` with `⟨L⁰ f, f⟩ ≥ ½‖f‖²_σ - N₀‖f‖²` on the grid, from the top
    /// of the spectrum of `½ S_op - sym(L⁰)` by Lanczos.
    ///
    /// It does not depend on `ν`.
    pub fn coercivity_constant(&self, steps: usize) -> Result<f64> {
        let op = self.inviscid_operator()?;
        let grid = *self.grid();
        let start: Vec<f64> = (0..grid.len())
            .map(|i| {
                let v = grid.node(i);
                sqrt_maxwellian(&v) * (1.0 + v[0] + 0.5 * v[1] * v[2]) + 1e-3 * ((i * 7919) % 101) as f64 / 101.0
            })
            .collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            let s = self.sigma_operator(x);
            let l = self.l0(x, &op).expect("grid lengths agree");
            // sym(L⁰) only differs from L⁰ through the drift a_g·∇
            let mut lt = l.clone();
            if self.coeffs.a_g.iter().any(|a| a.iter().any(|c| *c != 0.0)) {
                let drift = self.transpose_drift(x);
                let direct = self.drift(x);
                for i in 0..x.len() {
                    lt[i] += 0.5 * (direct[i] - drift[i]);
                }
            }
            for i in 0..x.len() {
                out[i] = 0.5 * s[i] - lt[i];
            }
        };
        let (_, hi) = lanczos_extremes(apply, &start, steps)?;
        Ok(hi)
    }

    fn drift(&self, f: &[f64]) -> Vec<f64> {
        let grad = self.gradient(f);
        (0..f.len())
            .map(|i| (0..3).map(|a| self.coeffs.a_g[i][a] * grad[a][i]).sum())
            .collect()
    }

    /// `(a_g·∇)ᵀ f = -Σ_a ∂_a(a_g^a f)` for the skew central difference.
    fn transpose_drift(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for a in 0..3 {
            let af: Vec<f64> = (0..f.len()).map(|i| self.coeffs.a_g[i][a] * f[i]).collect();
            let d = self.gradient(&af);
            for i in 0..f.len() {
                out[i] -= d[a][i];
            }
        }
        out
    }
}

/// Which velocity operator a run uses.
#[derive(Clone, Debug)]
pub enum CollisionMode {
    Kfp(Arc<KfpModel>),
    Landau(Arc<LandauModel>),
    /// No velocity operator; only `λ` and the source act.
    FreeTransport,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    BackwardEuler,
    /// Forward Euler under the monotonicity CFL bound.
    Explicit,
}

/// Everything a step needs besides the state.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub mode: CollisionMode,
    pub lambda: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub source: SourceTerm,
    /// Velocity weight `⟨v⟩^θ` used by the audits.
    pub theta_audit: f64,
    pub scheme: TimeScheme,
    pub cg_tol: f64,
}

impl SolverConfig {
    pub fn new(mode: CollisionMode, dt: f64) -> Self {
        Self {
            mode,
            lambda: 0.0,
            epsilon: 0.0,
            dt,
            source: SourceTerm::Zero,
            theta_audit: 0.0,
            scheme: TimeScheme::BackwardEuler,
            cg_tol: 1e-10,
        }
    }

    pub fn validate(&self, grid: &VelocityGrid) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            bad.push(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            bad.push(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        if !(self.theta_audit >= 0.0 && self.theta_audit.is_finite()) {
            bad.push(format!("theta_audit must be nonnegative, got {}", self.theta_audit));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            bad.push(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        let model_grid = match &self.mode {
            CollisionMode::Kfp(m) => Some(*m.grid()),
            CollisionMode::Landau(m) => Some(*m.grid()),
            CollisionMode::FreeTransport => None,
        };
        if model_grid.is_some_and(|g| g != *grid) {
            bad.push("collision model lives on a different velocity grid".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    /// Largest explicit step that keeps the scheme monotone.
    pub fn explicit_step_limit(&self) -> f64 {
        let rate = match &self.mode {
            CollisionMode::Kfp(m) => max_neg_diag(m.operator()) + m.drift_rate(),
            CollisionMode::Landau(m) => max_neg_diag(m.operator()),
            CollisionMode::FreeTransport => 0.0,
        } + self.lambda;
        if rate == 0.0 {
            f64::INFINITY
        } else {
            1.0 / rate
        }
    }
}

fn max_neg_diag(op: &AhOperator) -> f64 {
    op.diagonal().iter().fold(0.0_f64, |m, d| m.max(-d))
}

/// Result of the velocity solve in one cell.
#[derive(Clone, Debug)]
pub struct CellOutcome {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `Σ (velocity operator) h³`: the mass rate the operator creates, `λ` and source excluded.
    pub operator_mass: f64,
}

fn collide_cell(f: &[f64], x: f64, t_old: f64, dt: f64, cfg: &SolverConfig, grid: &VelocityGrid) -> Result<CellOutcome> {
    let n = f.len();
    let h3 = grid.spacing().powi(3);
    let lambda = cfg.lambda;
    let explicit = cfg.scheme == TimeScheme::Explicit;
    let g = cfg.source.sample(if explicit { t_old } else { t_old + dt }, x, grid);
    let (op, lagged): (Option<&AhOperator>, Vec<f64>) = match &cfg.mode {
        CollisionMode::Kfp(m) => (Some(m.operator()), m.drift(f).into_iter().map(|d| -d).collect()),
        CollisionMode::Landau(m) => (Some(m.operator()), m.explicit_terms(f)?),
        CollisionMode::FreeTransport => (None, vec![0.0; n]),
    };
    let lagged_mass: f64 = lagged.iter().sum::<f64>() * h3;
    if explicit {
        let af = op.map_or_else(|| vec![0.0; n], |op| op.apply(f));
        let values: Vec<f64> = (0..n)
            .map(|i| f[i] + dt * (af[i] + lagged[i] - lambda * f[i] + g[i]))
            .collect();
        return Ok(CellOutcome {
            values,
            iterations: 0,
            operator_mass: af.iter().sum::<f64>() * h3 + lagged_mass,
        });
    }
    let rhs: Vec<f64> = (0..n).map(|i| f[i] + dt * (g[i] + lagged[i])).collect();
    let Some(op) = op else {
        let values = rhs.iter().map(|r| r / (1.0 + dt * lambda)).collect();
        return Ok(CellOutcome {
            values,
            iterations: 0,
            operator_mass: lagged_mass,
        });
    };
    let diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 - dt * d + dt * lambda).collect();
    let apply = |u: &[f64], out: &mut [f64]| {
        op.apply_into(u, out);
        for i in 0..u.len() {
            out[i] = u[i] - dt * out[i] + dt * lambda * u[i];
        }
    };
    let mut values = f.to_vec();
    let outcome = pcg(apply, &diag, &rhs, &mut values, cfg.cg_tol, 10 * n)?;
    let af = op.apply(&values);
    Ok(CellOutcome {
        values,
        iterations: outcome.iterations,
        operator_mass: af.iter().sum::<f64>() * h3 + lagged_mass,
    })
}

/// Summary of one collision sub-step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionStats {
    pub max_iterations: usize,
    /// `Σ_cells (velocity operator mass rate) dx`.
    pub operator_mass: f64,
}

/// Advance the velocity operator by `dt` in every cell (in parallel).
pub fn collision_step(f: &PhaseField, cfg: &SolverConfig, dt: f64) -> Result<(PhaseField, CollisionStats)> {
    cfg.validate(&f.grid)?;
    if cfg.scheme == TimeScheme::Explicit {
        let limit = cfg.explicit_step_limit();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepSize(format!(
                "explicit collision step {dt} exceeds the monotonicity limit {limit}; use the implicit scheme"
            )));
        }
    }
    let grid = f.grid;
    let outcomes: Vec<CellOutcome> = (0..f.slab.cells())
        .into_par_iter()
        .map(|c| collide_cell(f.cell(c), f.slab.center(c), f.t, dt, cfg, &grid))
        .collect::<Result<_>>()?;
    let mut stats = CollisionStats::default();
    let mut values = Vec::with_capacity(f.values.len());
    for o in outcomes {
        stats.max_iterations = stats.max_iterations.max(o.iterations);
        stats.operator_mass += o.operator_mass * f.slab.dx();
        values.extend(o.values);
    }
    Ok((PhaseField::new(f.slab, grid, values, f.t + dt)?, stats))
}
