//! Lie splitting `transport ∘ collision` with runtime audits of the energy,
//! maximum-principle, `L∞`, mass and σ-energy estimates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::collision::{collision_step, CollisionMode, LandauModel, SolverConfig, TimeScheme};
use super::diagnostics::StepDiagnostics;
use super::domain::PhaseField;
use super::transport::{outgoing_flux, transport_step, wall_traces, TraceRecord};
use crate::error::{Error, Result};
use crate::grid::{AhOperator, FluxBoundary, VelocityGrid};
use crate::landau::LandauCoefficientSet;
use crate::norms::node_weights;
use crate::stencil::default_stencil;

/// Lanczos steps used for the coercivity constant of the Landau audit.
pub const DEFAULT_LANCZOS_STEPS: usize = 120;

/// Running state of the σ-energy audit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SigmaAudit {
    /// `N₀` in `⟨L⁰f, f⟩ ≥ ½‖f‖²_σ - N₀‖f‖²`.
    pub n0: f64,
    /// Largest `ρ_n` seen so far.
    pub max_rho: f64,
    /// `max_n (E_n + Σ Δt S + (λ + 1) Σ Δt E) / (Σ Δt ‖h‖² + E₀)`.
    pub c: f64,
    cum_s: f64,
    cum_e: f64,
    cum_h: f64,
    e0: f64,
}

/// Audit bookkeeping carried between steps.
#[derive(Clone, Debug)]
struct AuditState {
    f0_sup: f64,
    lo: f64,
    hi: f64,
    /// Running bound on the source part of `‖f‖_∞`.
    source_bound: f64,
    sigma: Option<SigmaAudit>,
}

/// A configured solver with its audit state.
#[derive(Clone, Debug)]
pub struct Solver {
    cfg: SolverConfig,
    weights: Vec<f64>,
    ones: Vec<f64>,
    edges: AhOperator,
    audit: AuditState,
    step: usize,
}

fn weighted_sum(f: &PhaseField, weights: &[f64], power: i32) -> f64 {
    let n = f.grid.len();
    f.values
        .iter()
        .enumerate()
        .map(|(k, x)| x.powi(power) * weights[k % n])
        .sum::<f64>()
        * f.cell_volume()
}

fn trace_fluxes(tr: &TraceRecord, grid: &VelocityGrid, weights: &[f64]) -> (f64, f64) {
    let h3 = grid.spacing().powi(3);
    let (mut plus, mut minus) = (0.0, 0.0);
    for i in 0..grid.len() {
        let v3 = grid.node(i)[2];
        let w = weights[i] * v3.abs() * h3;
        let (l, r) = (tr.left[i] * tr.left[i] * w, tr.right[i] * tr.right[i] * w);
        if v3 < 0.0 {
            plus += l;
            minus += r;
        } else if v3 > 0.0 {
            plus += r;
            minus += l;
        }
    }
    (plus, minus)
}

impl Solver {
    /// Set up the audits for a run starting at `f0`.
    pub fn new(cfg: SolverConfig, f0: &PhaseField) -> Result<Self> {
        Self::with_lanczos(cfg, f0, DEFAULT_LANCZOS_STEPS)
    }

    pub fn with_lanczos(cfg: SolverConfig, f0: &PhaseField, lanczos_steps: usize) -> Result<Self> {
        cfg.validate(&f0.grid)?;
        let grid = f0.grid;
        let weights = node_weights(&grid, cfg.theta_audit);
        let ones = vec![1.0; grid.len()];
        let dirs = default_stencil();
        let edges = AhOperator::from_raw(grid, dirs.clone(), vec![vec![0.0; grid.len()]; dirs.len()], FluxBoundary::NoFlux);
        let (mut lo, mut hi) = f0
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        if cfg.lambda > 0.0 || cfg.epsilon > 0.0 {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        let sigma = match &cfg.mode {
            CollisionMode::Landau(m) => Some(SigmaAudit {
                n0: m.coercivity_constant(lanczos_steps)?,
                e0: weighted_sum(f0, &ones, 2),
                ..Default::default()
            }),
            _ => None,
        };
        Ok(Self {
            audit: AuditState {
                f0_sup: f0.max_abs(),
                lo,
                hi,
                source_bound: 0.0,
                sigma,
            },
            cfg,
            weights,
            ones,
            edges,
            step: 0,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn sigma_audit(&self) -> Option<SigmaAudit> {
        self.audit.sigma
    }

    /// One split step of length `dt` (normally `cfg.dt`).
    pub fn advance_by(&mut self, f: &PhaseField, dt: f64) -> Result<(PhaseField, StepDiagnostics)> {
        let cfg = &self.cfg;
        let grid = f.grid;
        let eps = cfg.epsilon;
        let lambda = cfg.lambda;
        let w = &self.weights;

        let wall_sq = outgoing_flux(f, w, 2);
        let wall_mass = outgoing_flux(f, &self.ones, 1);

        let mut mid = transport_step(f, dt, eps)?;
        let traces = wall_traces(&mid, eps)?;
        let (flux_plus, flux_minus) = trace_fluxes(&traces, &grid, w);
        mid.t = f.t;
        let mass_mid = weighted_sum(&mid, &self.ones, 1);
        let (new, stats) = collision_step(&mid, cfg, dt)?;

        let t_src = if cfg.scheme == TimeScheme::Explicit { f.t } else { f.t + dt };
        let (mut g_min, mut g_max, mut g_sup) = (f64::INFINITY, f64::NEG_INFINITY, 0.0_f64);
        let (mut g_mass, mut g_sq, mut g_sq_flat, mut g_dot_f, mut g_dot_f_w) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let n = grid.len();
        let vol = f.cell_volume();
        for c in 0..f.slab.cells() {
            let g = cfg.source.sample(t_src, f.slab.center(c), &grid);
            for i in 0..n {
                g_min = g_min.min(g[i]);
                g_max = g_max.max(g[i]);
                g_sup = g_sup.max(g[i].abs());
                g_mass += g[i] * vol;
                g_sq += g[i] * g[i] * w[i] * vol;
                g_sq_flat += g[i] * g[i] * vol;
                g_dot_f += g[i] * new.values[c * n + i] * vol;
                g_dot_f_w += g[i] * new.values[c * n + i] * w[i] * vol;
            }
        }

        let e_old = weighted_sum(f, w, 2);
        let e_new = weighted_sum(&new, w, 2);
        let h3dx = vol;
        let dissipation: f64 = (0..new.slab.cells())
            .map(|c| self.edges.difference_energy(new.cell(c), w))
            .sum::<f64>()
            * h3dx;

        let energy_residual = match (&cfg.mode, self.audit.sigma.as_mut()) {
            (CollisionMode::Landau(m), Some(audit)) => {
                let e_old = weighted_sum(f, &self.ones, 2);
                let e_new = weighted_sum(&new, &self.ones, 2);
                let s_new: f64 = (0..new.slab.cells())
                    .map(|c| m.sigma_energy(new.cell(c)))
                    .sum::<f64>()
                    * new.slab.dx();
                let rho = (e_new - e_old) / dt + s_new + 2.0 * (lambda - audit.n0) * e_new - 2.0 * g_dot_f;
                audit.max_rho = if self.step == 0 { rho } else { audit.max_rho.max(rho) };
                audit.cum_s += dt * s_new;
                audit.cum_e += dt * e_new;
                audit.cum_h += dt * g_sq_flat;
                let denom = audit.cum_h + audit.e0;
                let lhs = e_new + audit.cum_s + (lambda + 1.0) * audit.cum_e;
                if denom > 0.0 {
                    audit.c = audit.c.max(lhs / denom);
                }
                dt * rho
            }
            _ => {
                let delta1 = match &cfg.mode {
                    CollisionMode::Kfp(m) => m.delta1(),
                    _ => 0.0,
                };
                // Young's inequality needs λ > 0; otherwise keep the pairing itself
                let source_term = if lambda > 0.0 { g_sq / lambda } else { 2.0 * g_dot_f_w };
                e_new - e_old + dt * (delta1 * dissipation + 0.5 * lambda * e_new + eps * wall_sq - source_term)
            }
        };

        if lambda > 0.0 || eps > 0.0 {
            self.audit.lo += dt * g_min.min(0.0);
            self.audit.hi += dt * g_max.max(0.0);
        } else {
            self.audit.lo += dt * g_min;
            self.audit.hi += dt * g_max;
        }
        let maxprin_residual = new
            .values
            .iter()
            .fold(0.0_f64, |m, &x| m.max(x - self.audit.hi).max(self.audit.lo - x));
        self.audit.source_bound = if lambda > 0.0 {
            self.audit.source_bound.max(g_sup / lambda)
        } else {
            self.audit.source_bound + dt * g_sup
        };
        let linf = new.max_abs();

        let mass_old = weighted_sum(f, &self.ones, 1);
        let mass_new = weighted_sum(&new, &self.ones, 1);
        let damped = if cfg.scheme == TimeScheme::Explicit { mass_mid } else { mass_new };
        let trunc_flux = -stats.operator_mass;
        let mass_residual = mass_new - mass_old - dt * (g_mass - lambda * damped - eps * wall_mass - trunc_flux);

        self.step += 1;
        let diag = StepDiagnostics {
            step: self.step,
            t: new.t,
            e_theta: e_new,
            dissipation,
            linf,
            mass: mass_new,
            flux_plus,
            flux_minus,
            trunc_flux,
            energy_residual,
            maxprin_residual,
            mass_residual,
            linf_residual: linf - (self.audit.f0_sup + self.audit.source_bound),
            bc_residual: traces.bc_residual(&grid),
            cg_iterations: stats.max_iterations,
        };
        if !diag.is_finite() {
            return Err(Error::Data(format!("non-finite diagnostics at step {}", self.step)));
        }
        Ok((new, diag))
    }

    pub fn advance(&mut self, f: &PhaseField) -> Result<(PhaseField, StepDiagnostics)> {
        let dt = self.cfg.dt;
        self.advance_by(f, dt)
    }
}

/// One step from `state` with audits measured against `state` as initial data.
pub fn advance(state: &PhaseField, cfg: &SolverConfig) -> Result<(PhaseField, StepDiagnostics)> {
    Solver::new(cfg.clone(), state)?.advance(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Keep every `k`-th state (the final state is always kept separately).
    pub checkpoint_every: Option<usize>,
    pub lanczos_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            checkpoint_every: None,
            lanczos_steps: DEFAULT_LANCZOS_STEPS,
        }
    }
}

/// Worst values over a run; every audit passes when the residuals are `≤ 0`
/// (up to roundoff for the exact identities).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub max_energy_residual: f64,
    pub max_maxprin_residual: f64,
    pub max_linf_residual: f64,
    pub max_bc_residual: f64,
    pub sum_abs_mass_residual: f64,
    pub max_abs_mass_residual: f64,
    /// `E_theta` never increased from one step to the next.
    pub energy_nonincreasing: bool,
    pub sigma_audit: Option<SigmaAudit>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub diagnostics: Vec<StepDiagnostics>,
    pub final_state: PhaseField,
    pub checkpoints: Vec<PhaseField>,
    pub summary: RunSummary,
}

fn summarize(rows: &[StepDiagnostics], e0: f64, sigma: Option<SigmaAudit>) -> RunSummary {
    let fold = |f: fn(&StepDiagnostics) -> f64| rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let mut prev = e0;
    let mut nonincreasing = true;
    for r in rows {
        if r.e_theta > prev {
            nonincreasing = false;
        }
        prev = r.e_theta;
    }
    RunSummary {
        steps: rows.len(),
        max_energy_residual: fold(|r| r.energy_residual),
        max_maxprin_residual: fold(|r| r.maxprin_residual),
        max_linf_residual: fold(|r| r.linf_residual),
        max_bc_residual: fold(|r| r.bc_residual),
        sum_abs_mass_residual: rows.iter().map(|r| r.mass_residual.abs()).sum(),
        max_abs_mass_residual: fold(|r| r.mass_residual.abs()),
        energy_nonincreasing: nonincreasing,
        sigma_audit: sigma,
    }
}

/// Advance from `f0` to `t_final`; the last step is shortened to land on `t_final`.
pub fn run(cfg: &SolverConfig, f0: &PhaseField, t_final: f64, opts: &RunOptions) -> Result<RunOutput> {
    run_with(cfg, f0, t_final, opts, |_, _| {})
}

/// [`run`] with an observer called after every step.
pub fn run_with(
    cfg: &SolverConfig,
    f0: &PhaseField,
    t_final: f64,
    opts: &RunOptions,
    mut observer: impl FnMut(&PhaseField, &StepDiagnostics),
) -> Result<RunOutput> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Config(format!("final time must be positive, got {t_final}")));
    }
    let mut solver = Solver::with_lanczos(cfg.clone(), f0, opts.lanczos_steps)?;
    let steps = ((t_final / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let e0 = weighted_sum(f0, &solver.weights, 2);
    let mut state = f0.clone();
    let start = f0.t;
    let mut rows = Vec::with_capacity(steps);
    let mut checkpoints = Vec::new();
    for k in 0..steps {
        let dt = if k + 1 == steps { start + t_final - state.t } else { cfg.dt };
        let (next, diag) = solver.advance_by(&state, dt)?;
        observer(&next, &diag);
        state = next;
        rows.push(diag);
        if opts.checkpoint_every.is_some_and(|e| e > 0 && (k + 1) % e == 0) {
            checkpoints.push(state.clone());
        }
    }
    Ok(RunOutput {
        summary: summarize(&rows, e0, solver.audit.sigma),
        diagnostics: rows,
        final_state: state,
        checkpoints,
    })
}

/// Outcome of raising `λ` until the energy audit passes at every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    /// Smallest tried `λ` that passed, if any.
    pub lambda: Option<f64>,
    /// `(λ, worst energy residual)` for every attempt.
    pub attempts: Vec<(f64, f64)>,
}

/// Try `λ₀, λ₀ r, λ₀ r², …` (at most `max_tries` values).
pub fn find_lambda_threshold(
    cfg: &SolverConfig,
    f0: &PhaseField,
    t_final: f64,
    lambda_start: f64,
    factor: f64,
    max_tries: usize,
) -> Result<LambdaSearch> {
    if !(lambda_start > 0.0 && factor > 1.0) {
        return Err(Error::Config(format!("need λ₀ > 0 and growth factor > 1, got {lambda_start}, {factor}")));
    }
    let mut attempts = Vec::new();
    let mut lambda = lambda_start;
    for _ in 0..max_tries {
        let mut c = cfg.clone();
        c.lambda = lambda;
        let out = run(&c, f0, t_final, &RunOptions::default())?;
        let worst = out.summary.max_energy_residual;
        attempts.push((lambda, worst));
        if worst <= 0.0 {
            return Ok(LambdaSearch {
                lambda: Some(lambda),
                attempts,
            });
        }
        lambda *= factor;
    }
    Ok(LambdaSearch { lambda: None, attempts })
}

/// `‖f - g‖_{2,0}` over the phase grid.
pub fn l2_distance(f: &PhaseField, g: &PhaseField) -> Result<f64> {
    f.same_shape(g)?;
    let s: f64 = f.values.iter().zip(&g.values).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s * f.cell_volume()).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViscosityRun {
    pub nu: f64,
    pub summary: RunSummary,
    pub min_stencil_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<ViscosityRun>,
    /// `‖f_{ν_k} - f_{ν_{k+1}}‖` at the final time.
    pub gaps: Vec<f64>,
    pub gaps_decreasing: bool,
    /// `(max - min) / min` of `N₀` and `C` over the sweep.
    pub n0_spread: f64,
    pub c_spread: f64,
    pub audits_pass: bool,
}

fn spread(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        (hi - lo) / lo
    } else if hi == lo {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Solve the Landau problem for each `ν` (non-increasing, at least two) and compare.
pub fn vanishing_viscosity_sweep(
    coeffs: Arc<LandauCoefficientSet>,
    base: &SolverConfig,
    nus: &[f64],
    f0: &PhaseField,
    t_final: f64,
    opts: &RunOptions,
) -> Result<SweepReport> {
    if nus.len() < 2 || nus.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Precondition(format!("ν list must be non-increasing with ≥ 2 entries, got {nus:?}")));
    }
    let mut runs = Vec::new();
    let mut finals: Vec<PhaseField> = Vec::new();
    for &nu in nus {
        let model = Arc::new(LandauModel::new(coeffs.clone(), nu)?);
        let min_stencil_weight = model.min_weight();
        let mut cfg = base.clone();
        cfg.mode = CollisionMode::Landau(model);
        let out = run(&cfg, f0, t_final, opts)?;
        runs.push(ViscosityRun {
            nu,
            summary: out.summary,
            min_stencil_weight,
        });
        finals.push(out.final_state);
    }
    let gaps: Vec<f64> = finals
        .windows(2)
        .map(|w| l2_distance(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    let gaps_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let audits = || runs.iter().filter_map(|r| r.summary.sigma_audit);
    Ok(SweepReport {
        n0_spread: spread(audits().map(|a| a.n0)),
        c_spread: spread(audits().map(|a| a.c)),
        audits_pass: runs
            .iter()
            .all(|r| r.summary.sigma_audit.is_some_and(|a| a.max_rho <= 0.0)),
        runs,
        gaps,
        gaps_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slab::{KfpModel, SlabDomain, SourceTerm};
    use crate::sym::{SymMatrix3, Vec3};

    fn setup() -> (SlabDomain, VelocityGrid) {
        (SlabDomain::new(1.0, 8).unwrap(), VelocityGrid::new(3.0, 7).unwrap())
    }

    fn kfp_cfg(grid: VelocityGrid, dt: f64) -> SolverConfig {
        let a = |v: &Vec3| SymMatrix3::new(1.0 + 0.2 * v[0].sin(), 1.0, 1.0, 0.1, 0.0, 0.0);
        let m = KfpModel::from_fn(grid, a, |_| [0.0; 3], 0.5, None).unwrap();
        SolverConfig::new(CollisionMode::Kfp(Arc::new(m)), dt)
    }

    fn bump(slab: SlabDomain, grid: VelocityGrid) -> PhaseField {
        PhaseField::from_fn(slab, grid, |x, v| {
            (-(x - 0.4).powi(2) * 20.0).exp() * (-(v[0] * v[0] + v[1] * v[1] + (v[2] - 0.5).powi(2))).exp()
        })
    }

    #[test]
    fn zero_data_gives_zero_diagnostics() {
        let (slab, grid) = setup();
        let f0 = PhaseField::zeros(slab, grid);
        let mut cfg = kfp_cfg(grid, 0.05);
        cfg.lambda = 1.0;
        cfg.epsilon = 0.1;
        let out = run(&cfg, &f0, 0.2, &RunOptions::default()).unwrap();
        assert!(out.final_state.values.iter().all(|&x| x == 0.0));
        for d in &out.diagnostics {
            let cols = d.numeric_columns();
            assert!(cols[1..].iter().all(|&x| x == 0.0), "{d:?}");
        }
    }

    #[test]
    fn constant_is_a_fixed_point() {
        let (slab, grid) = setup();
        let f0 = PhaseField::from_fn(slab, grid, |_, _| 0.7);
        let out = run(&kfp_cfg(grid, 0.05), &f0, 0.25, &RunOptions::default()).unwrap();
        let dev = out.final_state.values.iter().fold(0.0_f64, |m, x| m.max((x - 0.7).abs()));
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn decay_run_audits() {
        let (slab, grid) = setup();
        let f0 = bump(slab, grid);
        let mut cfg = kfp_cfg(grid, 0.02);
        cfg.lambda = 1.0;
        let out = run(&cfg, &f0, 0.3, &RunOptions { checkpoint_every: Some(5), ..Default::default() }).unwrap();
        assert!(out.summary.energy_nonincreasing);
        assert!(out.summary.max_energy_residual <= 0.0);
        assert!(out.summary.max_linf_residual <= 1e-12);
        assert!(out.summary.max_bc_residual <= 1e-14);
        assert!(out.summary.max_abs_mass_residual < 1e-9);
        assert_eq!(out.checkpoints.len(), 3);
        assert_eq!(out.diagnostics.len(), 15);
        assert!((out.final_state.t - 0.3).abs() < 1e-12);
    }

    #[test]
    fn explicit_monotone_run_respects_hull() {
        let (slab, grid) = setup();
        let f0 = bump(slab, grid);
        let mut cfg = kfp_cfg(grid, 0.0);
        cfg.scheme = TimeScheme::Explicit;
        cfg.source = SourceTerm::Function(Arc::new(|_, x, v| 0.3 * (x * 3.0).sin() * (-v[0] * v[0]).exp()));
        cfg.dt = cfg.explicit_step_limit();
        let out = run(&cfg, &f0, 40.0 * cfg.dt, &RunOptions::default()).unwrap();
        assert!(out.summary.max_maxprin_residual <= 1e-12);
        assert!(out.summary.max_linf_residual <= 1e-12);
    }

    #[test]
    fn epsilon_limit_is_cauchy() {
        let (slab, grid) = setup();
        let f0 = bump(slab, grid);
        let finals: Vec<PhaseField> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&eps| {
                let mut cfg = kfp_cfg(grid, 0.05);
                cfg.epsilon = eps;
                cfg.lambda = 0.5;
                run(&cfg, &f0, 0.5, &RunOptions::default()).unwrap().final_state
            })
            .collect();
        let d1 = l2_distance(&finals[0], &finals[1]).unwrap();
        let d2 = l2_distance(&finals[1], &finals[2]).unwrap();
        assert!(d2 < d1 && d2 > 0.0, "{d1} {d2}");
    }

    #[test]
    fn lambda_search_reports_threshold() {
        let (slab, grid) = setup();
        let f0 = bump(slab, grid);
        let mut cfg = kfp_cfg(grid, 0.05);
        cfg.theta_audit = 2.0;
        cfg.epsilon = 0.2;
        cfg.source = SourceTerm::Constant(0.1);
        let s = find_lambda_threshold(&cfg, &f0, 0.3, 0.05, 2.0, 12).unwrap();
        let lambda = s.lambda.expect("some λ passes");
        assert!(s.attempts.last().unwrap().1 <= 0.0);
        assert!(s.attempts.iter().rev().skip(1).all(|a| a.1 > 0.0));
        assert!(lambda >= 0.05);
    }
}
