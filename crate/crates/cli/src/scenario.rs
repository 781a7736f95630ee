//! Dispatch of validated scenarios to the numerics modules.

use std::sync::Arc;

use kinetex_core::expr::ScalarExpr;
use kinetex_core::geometry::{audit_chart, sample_disk, sample_velocity, BoundaryChart, ChartPreset};
use kinetex_core::grid::{AhOperator, FluxBoundary, GridField, VelocityGrid};
use kinetex_core::io;
use kinetex_core::landau::{
    fit_sigma_bounds, maxwellian, sigma_at_origin, GSource, LandauCoefficientSet, QuadratureSpec,
};
use kinetex_core::mirror::{continuity_probe, convolution_antisymmetry_check, mirror_extend, AntisymmetryQuadrature, HalfSpaceField};
use kinetex_core::slab::{
    find_lambda_threshold, run, to_csv, vanishing_viscosity_sweep, CollisionMode, KfpModel, LandauModel, PhaseField,
    RunOptions, RunOutput, SlabDomain, SolverConfig, SourceTerm,
};
use kinetex_core::stencil::{decompose, default_stencil, monotonicity_report, random_sym, reconstruct, stencil_weights};
use kinetex_core::sym::{dot, to_vector, SymMatrix3, Vec3};
use rand::Rng;
use serde_json::json;

use crate::config::{
    sym_at, ScenarioConfig, ScenarioKind, SolverParams, INITIAL_VARS, SOURCE_VARS, VELOCITY_VARS,
};
use crate::report::{Check, Comparison, OutputRecord};
use crate::seeds::sub_stream;

/// Tolerances of the scenario audits.
pub mod tol {
    pub const SPECULAR: f64 = 1e-10;
    pub const NORMAL_COUPLING: f64 = 1e-12;
    pub const INVERSE_METRIC: f64 = 1e-12;
    pub const SPEED_INVARIANCE: f64 = 1e-10;
    pub const ROUNDTRIP: f64 = 1e-10;
    pub const EXTENSION_JUMP: f64 = 1e-10;
    pub const BROKEN_JUMP: f64 = 1e-2;
    pub const ANTISYMMETRY_FACTOR: f64 = 5.0;
    pub const CONTROL_FACTOR: f64 = 10.0;
    pub const RECONSTRUCTION: f64 = 1e-12;
    pub const QUADRATIC_EXACTNESS: f64 = 1e-11;
    pub const SIGMA_ORIGIN: f64 = 1e-2;
    pub const EQUIVARIANCE: f64 = 1e-10;
    pub const K_SYMMETRY: f64 = 1e-6;
    pub const BC_RESIDUAL: f64 = 1e-14;
    pub const ROUNDOFF: f64 = 1e-12;
    pub const SWEEP_SPREAD: f64 = 0.2;
}

/// A module error, prefixed with the module that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{module}: {source}")]
pub struct ScenarioError {
    pub module: &'static str,
    #[source]
    pub source: kinetex_core::Error,
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn in_module<T>(module: &'static str) -> impl FnOnce(kinetex_core::Error) -> ScenarioError {
    move |source| ScenarioError { module, source }
}

trait Qualify<T> {
    fn within(self, module: &'static str) -> Result<T>;
}

impl<T> Qualify<T> for kinetex_core::Result<T> {
    fn within(self, module: &'static str) -> Result<T> {
        self.map_err(in_module::<T>(module))
    }
}

fn expr(src: &str, vars: &[&str], module: &'static str) -> Result<ScalarExpr> {
    ScalarExpr::parse(src, vars).within(module)
}

/// Run a validated scenario and collect its checks and artifacts.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<OutputRecord> {
    let mut rec = OutputRecord::new(cfg.clone());
    let grid = VelocityGrid::new(cfg.velocity.half_width, cfg.velocity.points).within("velocity_grid")?;
    match cfg.scenario {
        ScenarioKind::GeometryAudit => geometry_audit(cfg, &mut rec)?,
        ScenarioKind::StencilAudit => stencil_audit(cfg, grid, &mut rec)?,
        ScenarioKind::LandauBuild => landau_build(cfg, grid, &mut rec)?,
        ScenarioKind::KfpRun | ScenarioKind::LandauRun => solver_run(cfg, grid, &mut rec)?,
        ScenarioKind::ViscositySweep => viscosity_sweep(cfg, grid, &mut rec)?,
    }
    Ok(rec)
}

fn geometry_audit(cfg: &ScenarioConfig, rec: &mut OutputRecord) -> Result<()> {
    let g = cfg.geometry.clone().unwrap_or_default();
    let mut audits = Vec::new();
    for (i, spec) in g.charts.iter().enumerate() {
        let preset = ChartPreset::from(spec);
        let name = format!("{}[{i}]", preset.name());
        let chart = BoundaryChart::new(preset, g.radius).within("geometry_charts")?;
        let mut rng = sub_stream(cfg.seed, &format!("geometry.chart.{i}"));
        let a = audit_chart(&chart, g.samples, &mut rng).within("geometry_charts")?;
        let m = "geometry_charts";
        rec.check(Check::new(format!("{name}.specular"), &format!("{m}.specular_reflection"), a.specular, Comparison::Le, tol::SPECULAR));
        rec.check(Check::new(format!("{name}.normal_coupling"), &format!("{m}.normal_coupling"), a.normal_coupling, Comparison::Le, tol::NORMAL_COUPLING));
        rec.check(Check::new(format!("{name}.inverse_metric"), &format!("{m}.inverse_metric"), a.inverse_metric, Comparison::Le, tol::INVERSE_METRIC));
        rec.check(Check::new(format!("{name}.speed_invariance"), &format!("{m}.speed_invariance"), a.speed_invariance, Comparison::Le, tol::SPEED_INVARIANCE));
        rec.check(Check::new(format!("{name}.roundtrip"), &format!("{m}.chart_roundtrip"), a.roundtrip, Comparison::Le, tol::ROUNDTRIP));
        audits.push(a);

        let delta = g.extension_delta;
        let c = chart.clone();
        let ext = mirror_extend(HalfSpaceField::new(move |y: &Vec3, _: &Vec3| {
            c.blended_laplacian(delta, y).unwrap_or_else(|_| SymMatrix3::scaled_identity(f64::NAN))
        }));
        let mut rng = sub_stream(cfg.seed, &format!("geometry.extension.{i}"));
        let jump = continuity_probe(&ext, g.extension_samples, 0.9 * g.radius, 1.0, &mut rng);
        rec.check(Check::new(format!("{name}.extension_jump"), "mirror_extension.continuity", jump.max_jump, Comparison::Le, tol::EXTENSION_JUMP));
        let c = chart.clone();
        let broken = mirror_extend(HalfSpaceField::new(move |y: &Vec3, _: &Vec3| {
            let mut a = c.blended_laplacian(delta, y).unwrap_or_else(|_| SymMatrix3::scaled_identity(f64::NAN));
            // even a13 has no reflection-odd counterpart
            a.entries[4] += 0.05;
            a
        }));
        let control = continuity_probe(&broken, g.extension_samples.min(100), 0.9 * g.radius, 1.0, &mut rng);
        rec.check(Check::new(format!("{name}.broken_control_jump"), "mirror_extension.continuity_control", control.max_jump, Comparison::Ge, tol::BROKEN_JUMP));

        if let Some(q) = g.antisymmetry {
            let quad = AntisymmetryQuadrature {
                half_width: q.half_width,
                coarse: q.coarse,
                fine: q.fine,
            };
            let mut rng = sub_stream(cfg.seed, &format!("geometry.antisymmetry.{i}"));
            for p in 0..q.points {
                let y12 = sample_disk(&mut rng, 0.5 * g.radius);
                let w = sample_velocity(&mut rng, 1.0);
                let rep = convolution_antisymmetry_check(&chart, &maxwellian, y12, &w, &quad).within("mirror_extension")?;
                rec.check(Check::new(
                    format!("{name}.antisymmetry[{p}]"),
                    "mirror_extension.convolution_antisymmetry",
                    rep.residual,
                    Comparison::Le,
                    tol::ANTISYMMETRY_FACTOR * rep.quad_error_estimate,
                ));
                rec.warnings.extend(rep.warning.clone());
                let (m, _) = chart.jacobian_matrix(&[y12[0], y12[1], 0.0]).within("geometry_charts")?;
                let inv = m.try_inverse().ok_or_else(|| ScenarioError {
                    module: "geometry_charts",
                    source: kinetex_core::Error::ChartSingularity(format!("singular Jacobian over {y12:?}")),
                })?;
                let odd = move |v: &Vec3| (inv * to_vector(v))[2] * maxwellian(v);
                let bad = convolution_antisymmetry_check(&chart, &odd, y12, &w, &quad).within("mirror_extension")?;
                rec.check(Check::new(
                    format!("{name}.antisymmetry_control[{p}]"),
                    "mirror_extension.convolution_antisymmetry_control",
                    bad.residual,
                    Comparison::Gt,
                    tol::CONTROL_FACTOR * rep.quad_error_estimate.max(bad.quad_error_estimate),
                ));
            }
        }
    }
    rec.metric("chart_audits", &audits);
    Ok(())
}

fn stencil_audit(cfg: &ScenarioConfig, grid: VelocityGrid, rec: &mut OutputRecord) -> Result<()> {
    let s = cfg.stencil.unwrap_or_default();
    let delta1 = s.delta1.unwrap_or(s.delta / 8.0);
    let mut rng = sub_stream(cfg.seed, "stencil.matrices");
    let (mut worst, mut floor_gap, mut min_weight) = (0.0_f64, f64::INFINITY, f64::INFINITY);
    let mut non_monotone = 0usize;
    for _ in 0..s.samples {
        let a = random_sym(&mut rng, s.delta);
        let d = decompose(&a, s.delta, delta1).within("stencil_decomp")?;
        worst = worst.max(reconstruct(&d).sub(&a).max_abs());
        // only pair directions carry the floor; basis weights may go negative
        let pair_min = d.weights[3..].iter().copied().fold(f64::INFINITY, f64::min);
        floor_gap = floor_gap.min(pair_min - delta1);
        let m = monotonicity_report(&d);
        min_weight = min_weight.min(m.min_weight);
        non_monotone += usize::from(!m.monotone);
    }
    rec.check(Check::new("reconstruction", "stencil_decomp.reconstruction", worst, Comparison::Le, tol::RECONSTRUCTION));
    rec.check(Check::new("pair_weight_floor", "stencil_decomp.pair_weights", floor_gap, Comparison::Ge, -tol::ROUNDOFF));
    rec.metric("min_weight", min_weight);
    rec.metric("non_monotone_fraction", non_monotone as f64 / s.samples.max(1) as f64);
    rec.metric("delta1", delta1);

    // A_h with constant a acting on a quadratic gives 2 tr(a Q) at interior nodes
    let mut rng = sub_stream(cfg.seed, "stencil.quadratic");
    let a = random_sym(&mut rng, s.delta);
    let q = SymMatrix3 {
        entries: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
    };
    let lin: Vec3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let w = stencil_weights(&a, delta1);
    let op = AhOperator::from_raw(
        grid,
        default_stencil(),
        w.iter().map(|&x| vec![x; grid.len()]).collect(),
        FluxBoundary::ZeroExtension,
    );
    let u: Vec<f64> = (0..grid.len())
        .map(|i| {
            let v = grid.node(i);
            q.quad(&v) + dot(&lin, &v)
        })
        .collect();
    let exact = 2.0 * (0..3).map(|i| (0..3).map(|j| a.get(i, j) * q.get(j, i)).sum::<f64>()).sum::<f64>();
    let au = op.apply(&u);
    let err = (0..grid.len())
        .filter(|&i| grid.is_interior(i, 1))
        .fold(0.0_f64, |m, i| m.max((au[i] - exact).abs()));
    rec.check(Check::new("quadratic_exactness", "velocity_grid.ah_consistency", err, Comparison::Le, tol::QUADRATIC_EXACTNESS));
    Ok(())
}

fn g_source(src: &str, grid: VelocityGrid) -> Result<GSource> {
    let e = expr(src, &VELOCITY_VARS, "landau_coeffs")?;
    if e.is_constant() && e.eval(&[0.0; 3]) == 0.0 {
        return Ok(GSource::Zero);
    }
    Ok(GSource::Grid {
        g: GridField::from_fn(grid, |v| e.eval(v)),
        grad: None,
    })
}

fn build_coefficients(cfg: &ScenarioConfig, grid: VelocityGrid, rec: &mut OutputRecord) -> Result<Arc<LandauCoefficientSet>> {
    let l = cfg.landau.clone().unwrap_or_default();
    let quad = QuadratureSpec {
        refine: l.refine,
        margin: l.margin,
    };
    let set = LandauCoefficientSet::build(&grid, &g_source(&l.g, grid)?, &quad).within("landau_coeffs")?;
    rec.warnings.extend(set.warning.clone());
    Ok(Arc::new(set))
}

fn landau_build(cfg: &ScenarioConfig, grid: VelocityGrid, rec: &mut OutputRecord) -> Result<()> {
    let l = cfg.landau.clone().unwrap_or_default();
    let set = build_coefficients(cfg, grid, rec)?;
    let c = grid.center();
    let origin = set.sigma[grid.index(c, c, c)];
    let exact = sigma_at_origin();
    let rel = (0..3).fold(0.0_f64, |m, i| m.max((origin.get(i, i) / exact - 1.0).abs()));
    rec.check(Check::new("sigma_origin", "landau_coeffs.sigma_origin", rel, Comparison::Le, tol::SIGMA_ORIGIN));
    rec.check(Check::new(
        "cube_equivariance",
        "landau_coeffs.equivariance",
        cube_equivariance(&grid, &set.sigma),
        Comparison::Le,
        tol::EQUIVARIANCE,
    ));
    let fit = fit_sigma_bounds(&grid, &set.sigma);
    rec.check(Check::new("sigma_lower_bound", "landau_coeffs.sigma_bounds", fit.c1, Comparison::Gt, 0.0));
    let bounds = set.bounds();
    rec.check(Check::new("sigma_g_elliptic", "landau_coeffs.sigma_g_bounds", bounds.min_eig_sigma_g, Comparison::Gt, 0.0));

    let mut rng = sub_stream(cfg.seed, "landau.k_pairs");
    let mut worst = 0.0_f64;
    for _ in 0..l.k_pairs {
        let f = smooth_field(grid, &mut rng);
        let p = smooth_field(grid, &mut rng);
        let kf = set.apply_k_field(&f).within("landau_coeffs")?;
        let kp = set.apply_k_field(&p).within("landau_coeffs")?;
        let gap = (kf.inner(&p) - kp.inner(&f)).abs() / (f.inner(&f).sqrt() * p.inner(&p).sqrt());
        worst = worst.max(gap);
    }
    rec.check(Check::new("k_self_adjoint", "landau_coeffs.k_symmetry", worst, Comparison::Le, tol::K_SYMMETRY));
    rec.metric("sigma_origin", origin);
    rec.metric("sigma_origin_exact", exact);
    rec.metric("sigma_bound_fit", fit);
    rec.metric("coefficient_bounds", bounds);
    rec.metric("quadrature_tail", set.tail);

    rec.add_file("sigma.field", io::sym_table_bytes(&grid, &set.sigma).within("io")?);
    rec.add_file("sigma_g.field", io::sym_table_bytes(&grid, &set.sigma_g).within("io")?);
    let a_g: Vec<f64> = set.a_g.iter().flatten().copied().collect();
    rec.add_file("a_g.field", io::encode(&io::FieldHeader::new(&grid, 3), &a_g).within("io")?);
    Ok(())
}

/// Gaussian envelope times a random quadratic polynomial.
fn smooth_field<R: Rng>(grid: VelocityGrid, rng: &mut R) -> GridField {
    let width = rng.gen_range(0.3..0.8);
    let center: Vec3 = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    let coef: [f64; 10] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    GridField::from_fn(grid, |v| {
        let d = [v[0] - center[0], v[1] - center[1], v[2] - center[2]];
        let poly = coef[0]
            + coef[1] * v[0]
            + coef[2] * v[1]
            + coef[3] * v[2]
            + coef[4] * v[0] * v[0]
            + coef[5] * v[1] * v[1]
            + coef[6] * v[2] * v[2]
            + coef[7] * v[0] * v[1]
            + coef[8] * v[0] * v[2]
            + coef[9] * v[1] * v[2];
        poly * (-width * dot(&d, &d)).exp()
    })
}

/// Largest deviation of a matrix table from invariance under the 48 signed
/// axis permutations of the cube.
pub fn cube_equivariance(grid: &VelocityGrid, table: &[SymMatrix3]) -> f64 {
    let n = grid.points();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut worst = 0.0_f64;
    for perm in perms {
        for signs in 0..8 {
            let sgn = |k: usize| if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
            for (idx, src) in table.iter().enumerate() {
                let m = grid.multi_index(idx);
                let pm: [usize; 3] = std::array::from_fn(|k| if sgn(k) < 0.0 { n - 1 - m[perm[k]] } else { m[perm[k]] });
                let img = table[grid.index(pm[0], pm[1], pm[2])];
                for a in 0..3 {
                    for b in 0..3 {
                        let expect = sgn(a) * sgn(b) * src.get(perm[a], perm[b]);
                        worst = worst.max((img.get(a, b) - expect).abs());
                    }
                }
            }
        }
    }
    worst
}

struct RunSetup {
    solver: SolverConfig,
    f0: PhaseField,
    t_final: f64,
    opts: RunOptions,
    params: SolverParams,
}

fn run_setup(cfg: &ScenarioConfig, grid: VelocityGrid, mode: CollisionMode) -> Result<RunSetup> {
    let params = cfg.solver.clone().unwrap_or_default();
    let time = cfg.time.expect("validated run config has a time block");
    let slab_cfg = cfg.slab.unwrap_or_default();
    let slab = SlabDomain::new(slab_cfg.length, slab_cfg.cells).within("slab_solver")?;
    let init = expr(&params.initial, &INITIAL_VARS, "slab_solver")?;
    let f0 = PhaseField::from_fn(slab, grid, |x, v| init.eval(&[x, v[0], v[1], v[2]]));
    let src = expr(&params.source, &SOURCE_VARS, "slab_solver")?;
    let source = if src.is_constant() {
        match src.eval(&[0.0; 5]) {
            0.0 => SourceTerm::Zero,
            c => SourceTerm::Constant(c),
        }
    } else {
        SourceTerm::Function(Arc::new(move |t, x, v: &Vec3| src.eval(&[t, x, v[0], v[1], v[2]])))
    };
    let mut solver = SolverConfig::new(mode, time.dt);
    solver.lambda = params.lambda;
    solver.epsilon = params.epsilon;
    solver.theta_audit = params.theta_audit;
    solver.cg_tol = params.cg_tol;
    solver.scheme = time.scheme.into();
    solver.source = source;
    solver.validate(&grid).within("slab_solver")?;
    Ok(RunSetup {
        solver,
        f0,
        t_final: time.t_final,
        opts: RunOptions {
            checkpoint_every: (time.checkpoint_every > 0).then_some(time.checkpoint_every),
            lanczos_steps: params.lanczos_steps,
        },
        params,
    })
}

fn is_zero_vector(b: &[String; 3]) -> Result<bool> {
    for s in b {
        let e = expr(s, &VELOCITY_VARS, "slab_solver")?;
        if !(e.is_constant() && e.eval(&[0.0; 3]) == 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn solver_run(cfg: &ScenarioConfig, grid: VelocityGrid, rec: &mut OutputRecord) -> Result<()> {
    let (mode, monotone, drift_free) = match (&cfg.kfp, cfg.scenario) {
        (Some(k), ScenarioKind::KfpRun) => {
            let a: Vec<ScalarExpr> = k
                .a
                .iter()
                .map(|s| expr(s, &VELOCITY_VARS, "slab_solver"))
                .collect::<Result<_>>()?;
            let b: Vec<ScalarExpr> = k
                .b
                .iter()
                .map(|s| expr(s, &VELOCITY_VARS, "slab_solver"))
                .collect::<Result<_>>()?;
            let model = KfpModel::from_fn(grid, |v| sym_at(&a, v), |v| std::array::from_fn(|i| b[i].eval(v)), k.delta, k.delta1)
                .within("slab_solver")?;
            let monotone = model.is_monotone();
            rec.metric("stencil_monotone", monotone);
            rec.metric("max_drift", model.max_drift());
            (CollisionMode::Kfp(Arc::new(model)), monotone, is_zero_vector(&k.b)?)
        }
        _ => {
            let set = build_coefficients(cfg, grid, rec)?;
            let nu = cfg.landau.as_ref().map_or(0.0, |l| l.nu);
            let model = LandauModel::new(set, nu).within("slab_solver")?;
            rec.metric("min_stencil_weight", model.min_weight());
            (CollisionMode::Landau(Arc::new(model)), false, false)
        }
    };
    let mut setup = run_setup(cfg, grid, mode)?;
    if let Some(ls) = setup.params.lambda_search {
        let search = find_lambda_threshold(&setup.solver, &setup.f0, setup.t_final, ls.start, ls.factor, ls.max_tries)
            .within("slab_solver")?;
        rec.metric("lambda_search", json!({ "lambda": search.lambda, "attempts": search.attempts }));
        rec.check(Check::new(
            "lambda_found",
            "slab_solver.lambda_search",
            search.lambda.map_or(0.0, |_| 1.0),
            Comparison::Gt,
            0.0,
        ));
        if let Some(l) = search.lambda {
            setup.solver.lambda = l;
        }
    }
    rec.metric("lambda", setup.solver.lambda);
    rec.metric("explicit_step_limit", finite_or_null(setup.solver.explicit_step_limit()));
    let out = run(&setup.solver, &setup.f0, setup.t_final, &setup.opts).within("slab_solver")?;
    run_checks(rec, &out, &setup, monotone, drift_free);
    rec.add_file("diagnostics.csv", to_csv(&out.diagnostics).into_bytes());
    rec.add_file("final.field", io::phase_field_bytes(&out.final_state).within("io")?);
    for (k, state) in out.checkpoints.iter().enumerate() {
        rec.add_file(format!("checkpoints/state_{:04}.field", k + 1), io::phase_field_bytes(state).within("io")?);
    }
    Ok(())
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_checks(rec: &mut OutputRecord, out: &RunOutput, setup: &RunSetup, monotone: bool, drift_free: bool) {
    let s = &out.summary;
    let cfg = &setup.solver;
    match s.sigma_audit {
        Some(a) => {
            rec.check(Check::new("sigma_energy", "slab_solver.sigma_energy", a.max_rho, Comparison::Le, tol::ROUNDOFF));
            rec.metric("sigma_audit", json!({ "n0": a.n0, "max_rho": a.max_rho, "c": a.c }));
        }
        None => rec.check(Check::new(
            "energy_inequality",
            "slab_solver.energy_inequality",
            s.max_energy_residual,
            Comparison::Le,
            tol::ROUNDOFF,
        )),
    }
    rec.check(Check::new("boundary_condition", "slab_solver.trace_relation", s.max_bc_residual, Comparison::Le, tol::BC_RESIDUAL));
    let explicit = cfg.scheme == kinetex_core::slab::TimeScheme::Explicit;
    if monotone && (explicit || drift_free) {
        rec.check(Check::new("linf_bound", "slab_solver.linf_bound", s.max_linf_residual, Comparison::Le, tol::ROUNDOFF));
    }
    if monotone && explicit {
        rec.check(Check::new("max_principle", "slab_solver.max_principle", s.max_maxprin_residual, Comparison::Le, tol::ROUNDOFF));
    }
    let source_free = matches!(cfg.source, SourceTerm::Zero);
    if drift_free && source_free && cfg.theta_audit == 0.0 && matches!(cfg.mode, CollisionMode::Kfp(_)) {
        let mut prev = out.diagnostics.first().map_or(0.0, |d| d.e_theta);
        let mut growth = 0.0_f64;
        for d in &out.diagnostics[1..] {
            growth = growth.max(d.e_theta - prev);
            prev = d.e_theta;
        }
        let scale = out.diagnostics.first().map_or(1.0, |d| d.e_theta.max(f64::MIN_POSITIVE));
        rec.check(Check::new("energy_decay", "slab_solver.energy_decay", growth / scale, Comparison::Le, tol::ROUNDOFF));
    }
    rec.metric("run_summary", s);
}

fn viscosity_sweep(cfg: &ScenarioConfig, grid: VelocityGrid, rec: &mut OutputRecord) -> Result<()> {
    let nus = cfg.sweep.as_ref().expect("validated sweep config").nus.clone();
    let set = build_coefficients(cfg, grid, rec)?;
    let first = LandauModel::new(set.clone(), nus[0]).within("slab_solver")?;
    let setup = run_setup(cfg, grid, CollisionMode::Landau(Arc::new(first)))?;
    let report = vanishing_viscosity_sweep(set, &setup.solver, &nus, &setup.f0, setup.t_final, &setup.opts)
        .within("slab_solver")?;
    let worst_step = report.gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if report.gaps.len() >= 2 {
        rec.check(Check::new("gaps_decreasing", "slab_solver.viscosity_sweep", worst_step, Comparison::Le, 0.0));
    }
    rec.check(Check::new("audit_constant_spread", "slab_solver.viscosity_sweep", report.c_spread, Comparison::Le, tol::SWEEP_SPREAD));
    let mut csv = String::from("nu,gap_to_next,max_rho,c,n0,min_stencil_weight,max_bc_residual\n");
    for (k, r) in report.runs.iter().enumerate() {
        let a = r.summary.sigma_audit.expect("Landau runs carry a sigma audit");
        rec.check(Check::new(format!("nu={}.sigma_energy", r.nu), "slab_solver.sigma_energy", a.max_rho, Comparison::Le, tol::ROUNDOFF));
        rec.check(Check::new(
            format!("nu={}.boundary_condition", r.nu),
            "slab_solver.trace_relation",
            r.summary.max_bc_residual,
            Comparison::Le,
            tol::BC_RESIDUAL,
        ));
        let gap = report.gaps.get(k).map_or(String::new(), |g| format!("{g:e}"));
        csv.push_str(&format!(
            "{:e},{gap},{:e},{:e},{:e},{:e},{:e}\n",
            r.nu, a.max_rho, a.c, a.n0, r.min_stencil_weight, r.summary.max_bc_residual
        ));
    }
    rec.metric("sweep", json!({
        "nus": nus,
        "gaps": report.gaps,
        "gaps_decreasing": report.gaps_decreasing,
        "n0_spread": report.n0_spread,
        "c_spread": report.c_spread,
    }));
    rec.add_file("sweep.csv", csv.into_bytes());
    Ok(())
}
