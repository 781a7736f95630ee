//! Scenario files: schema, parsing, validation and documented defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use kinetex_core::expr::ScalarExpr;
use kinetex_core::geometry::ChartPreset;
use kinetex_core::grid::VelocityGrid;
use kinetex_core::slab::TimeScheme;
use kinetex_core::stencil::check_sym;
use kinetex_core::sym::SymMatrix3;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Variables available to velocity profiles `a(v)`, `b(v)` and `g(v)`.
pub const VELOCITY_VARS: [&str; 3] = ["v1", "v2", "v3"];
pub const INITIAL_VARS: [&str; 4] = ["x", "v1", "v2", "v3"];
pub const SOURCE_VARS: [&str; 5] = ["t", "x", "v1", "v2", "v3"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GeometryAudit,
    StencilAudit,
    LandauBuild,
    KfpRun,
    LandauRun,
    ViscositySweep,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::GeometryAudit => "geometry_audit",
            ScenarioKind::StencilAudit => "stencil_audit",
            ScenarioKind::LandauBuild => "landau_build",
            ScenarioKind::KfpRun => "kfp_run",
            ScenarioKind::LandauRun => "landau_run",
            ScenarioKind::ViscositySweep => "viscosity_sweep",
        }
    }

    fn is_run(&self) -> bool {
        matches!(
            self,
            ScenarioKind::KfpRun | ScenarioKind::LandauRun | ScenarioKind::ViscositySweep
        )
    }
}

/// Top-level scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ScenarioConfig {
    /// Schema version; must be 1.
    pub version: u32,
    pub scenario: ScenarioKind,
    /// Root of every random sub-stream.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub velocity: VelocityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<SlabConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kfp: Option<KfpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landau: Option<LandauConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stencil: Option<StencilConfig>,
}

/// Velocity box `[-V, V]³` with `points` nodes per axis (odd).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct VelocityConfig {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_half_width() -> f64 {
    4.0
}

fn default_points() -> usize {
    17
}

impl Default for VelocityConfig {
    fn default() -> Self {
        Self {
            half_width: default_half_width(),
            points: default_points(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SlabConfig {
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn one() -> f64 {
    1.0
}

fn default_cells() -> usize {
    16
}

impl Default for SlabConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            cells: default_cells(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    BackwardEuler,
    Explicit,
}

impl From<Scheme> for TimeScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::BackwardEuler => TimeScheme::BackwardEuler,
            Scheme::Explicit => TimeScheme::Explicit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Write every k-th state as a checkpoint; 0 disables checkpoints.
    #[serde(default)]
    pub checkpoint_every: usize,
}

/// Damping, wall relaxation, audit weight and data of a slab run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SolverParams {
    #[serde(default)]
    pub lambda: f64,
    /// Wall relaxation in `[0, 1]`; 0 is pure specular reflection.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub theta_audit: f64,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "default_lanczos")]
    pub lanczos_steps: usize,
    /// `f0(x, v1, v2, v3)`.
    #[serde(default = "zero_expr")]
    pub initial: String,
    /// `g(t, x, v1, v2, v3)`.
    #[serde(default = "zero_expr")]
    pub source: String,
    /// Raise `λ` geometrically until the energy audit passes, then run with it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_search: Option<LambdaSearchConfig>,
}

fn default_cg_tol() -> f64 {
    1e-10
}

fn default_lanczos() -> usize {
    kinetex_core::slab::solver::DEFAULT_LANCZOS_STEPS
}

fn zero_expr() -> String {
    "0".to_string()
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            epsilon: 0.0,
            theta_audit: 0.0,
            cg_tol: default_cg_tol(),
            lanczos_steps: default_lanczos(),
            initial: zero_expr(),
            source: zero_expr(),
            lambda_search: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LambdaSearchConfig {
    #[serde(default = "default_lambda_start")]
    pub start: f64,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default = "default_tries")]
    pub max_tries: usize,
}

fn default_lambda_start() -> f64 {
    0.01
}

fn default_factor() -> f64 {
    2.0
}

fn default_tries() -> usize {
    12
}

/// Kinetic Fokker-Planck coefficients as expressions in `v1, v2, v3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct KfpConfig {
    /// Ellipticity parameter: `a ∈ Sym(δ)` at every node.
    pub delta: f64,
    /// Stencil weight floor; defaults to `δ/8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    /// `[a11, a22, a33, a12, a13, a23]`.
    #[serde(default = "identity_exprs")]
    pub a: [String; 6],
    #[serde(default = "zero_vector_exprs")]
    pub b: [String; 3],
}

fn identity_exprs() -> [String; 6] {
    ["1", "1", "1", "0", "0", "0"].map(String::from)
}

fn zero_vector_exprs() -> [String; 3] {
    ["0", "0", "0"].map(String::from)
}

/// Linearized Landau setup around the Maxwellian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LandauConfig {
    /// Viscosity `ν ≥ 0` added as `ν Δ_v`.
    #[serde(default)]
    pub nu: f64,
    /// Perturbation `g(v1, v2, v3)`; gradients by central differences.
    #[serde(default = "zero_expr")]
    pub g: String,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Random smooth pairs for the self-adjointness check of `landau_build`.
    #[serde(default = "default_pairs")]
    pub k_pairs: usize,
}

fn default_refine() -> usize {
    2
}

fn default_margin() -> f64 {
    4.0
}

fn default_pairs() -> usize {
    20
}

impl Default for LandauConfig {
    fn default() -> Self {
        Self {
            nu: 0.0,
            g: zero_expr(),
            refine: default_refine(),
            margin: default_margin(),
            k_pairs: default_pairs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SweepConfig {
    /// Non-increasing viscosities, at least two.
    pub nus: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    /// A struct variant so that stray fields are rejected.
    Flat {},
    Paraboloid { c1: f64, c2: f64 },
    Sinusoidal { amplitude: f64, k1: f64, k2: f64 },
    /// `ρ(y1, y2)` as an expression.
    Expression { expr: String },
}

impl From<&ChartSpec> for ChartPreset {
    fn from(c: &ChartSpec) -> Self {
        match c.clone() {
            ChartSpec::Flat {} => ChartPreset::Flat,
            ChartSpec::Paraboloid { c1, c2 } => ChartPreset::Paraboloid { c1, c2 },
            ChartSpec::Sinusoidal { amplitude, k1, k2 } => ChartPreset::Sinusoidal { amplitude, k1, k2 },
            ChartSpec::Expression { expr } => ChartPreset::Expression { expr },
        }
    }
}

impl From<&ChartPreset> for ChartSpec {
    fn from(c: &ChartPreset) -> Self {
        match c.clone() {
            ChartPreset::Flat => ChartSpec::Flat {},
            ChartPreset::Paraboloid { c1, c2 } => ChartSpec::Paraboloid { c1, c2 },
            ChartPreset::Sinusoidal { amplitude, k1, k2 } => ChartSpec::Sinusoidal { amplitude, k1, k2 },
            ChartPreset::Expression { expr } => ChartSpec::Expression { expr },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GeometryConfig {
    #[serde(default = "standard_charts")]
    pub charts: Vec<ChartSpec>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Random boundary points per chart.
    #[serde(default = "default_geometry_samples")]
    pub samples: usize,
    /// Interface probes of the extended Laplacian coefficient per chart.
    #[serde(default = "default_extension_samples")]
    pub extension_samples: usize,
    #[serde(default = "default_extension_delta")]
    pub extension_delta: f64,
    /// Convolution antisymmetry at the boundary; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antisymmetry: Option<AntisymmetryConfig>,
}

fn standard_charts() -> Vec<ChartSpec> {
    ChartPreset::standard().iter().map(ChartSpec::from).collect()
}

fn default_radius() -> f64 {
    0.5
}

fn default_geometry_samples() -> usize {
    10_000
}

fn default_extension_samples() -> usize {
    1000
}

fn default_extension_delta() -> f64 {
    0.2
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            charts: standard_charts(),
            radius: default_radius(),
            samples: default_geometry_samples(),
            extension_samples: default_extension_samples(),
            extension_delta: default_extension_delta(),
            antisymmetry: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct AntisymmetryConfig {
    #[serde(default = "default_box")]
    pub half_width: f64,
    #[serde(default = "default_coarse")]
    pub coarse: usize,
    #[serde(default = "default_fine")]
    pub fine: usize,
    /// Random boundary points `(y1, y2, w)` per chart.
    #[serde(default = "default_antisymmetry_points")]
    pub points: usize,
}

fn default_box() -> f64 {
    5.0
}

fn default_coarse() -> usize {
    32
}

fn default_fine() -> usize {
    48
}

fn default_antisymmetry_points() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct StencilConfig {
    #[serde(default = "default_stencil_samples")]
    pub samples: usize,
    #[serde(default = "default_stencil_delta")]
    pub delta: f64,
    /// Defaults to `δ/8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
}

fn default_stencil_samples() -> usize {
    1000
}

fn default_stencil_delta() -> f64 {
    0.2
}

impl Default for StencilConfig {
    fn default() -> Self {
        Self {
            samples: default_stencil_samples(),
            delta: default_stencil_delta(),
            delta1: None,
        }
    }
}

/// One schema violation, named by its dotted field path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path} not found: {source}")]
    Missing {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{} schema violation(s) in {}:\n{}", .violations.len(), .path.display(), list(.violations))]
    Schema { path: PathBuf, violations: Vec<Violation> },
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  - {x}")).collect::<Vec<_>>().join("\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    fn detect(path: &Path, text: &str) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("toml") => Format::Toml,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Toml,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Missing {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text, Format::detect(path, &text), path)
}

/// Parse, validate and fill documented defaults. `origin` only labels errors.
pub fn parse_str(text: &str, format: Format, origin: &Path) -> Result<ScenarioConfig, ConfigError> {
    let parse_err = |message: String| ConfigError::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let value: serde_json::Value = match format {
        Format::Json => serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?,
        Format::Toml => {
            let table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
            serde_json::to_value(table).map_err(|e| parse_err(e.to_string()))?
        }
    };
    let schema_err = |violations| ConfigError::Schema {
        path: origin.to_path_buf(),
        violations,
    };
    let mut violations = Vec::new();
    let cfg: Option<ScenarioConfig> = serde_ignored::deserialize(value, |p| {
        violations.push(Violation {
            field: p.to_string(),
            message: "unknown key".into(),
        })
    })
    .map_err(|e| {
        violations.push(Violation {
            field: "(document)".into(),
            message: e.to_string(),
        })
    })
    .ok();
    let Some(mut cfg) = cfg else {
        return Err(schema_err(violations));
    };
    violations.extend(validate(&cfg));
    if !violations.is_empty() {
        return Err(schema_err(violations));
    }
    normalize(&mut cfg);
    Ok(cfg)
}

pub fn to_toml(cfg: &ScenarioConfig) -> String {
    toml::to_string(cfg).expect("scenario configs serialize to TOML")
}

/// Fill the blocks a scenario uses with their documented defaults.
pub fn normalize(cfg: &mut ScenarioConfig) {
    match cfg.scenario {
        ScenarioKind::GeometryAudit => {
            cfg.geometry.get_or_insert_with(GeometryConfig::default);
        }
        ScenarioKind::StencilAudit => {
            let s = cfg.stencil.get_or_insert_with(StencilConfig::default);
            s.delta1.get_or_insert(s.delta / 8.0);
        }
        ScenarioKind::LandauBuild => {
            cfg.landau.get_or_insert_with(LandauConfig::default);
        }
        _ => {}
    }
    if cfg.scenario.is_run() {
        cfg.slab.get_or_insert_with(SlabConfig::default);
        cfg.solver.get_or_insert_with(SolverParams::default);
        if let Some(k) = cfg.kfp.as_mut() {
            k.delta1.get_or_insert(k.delta / 8.0);
        }
        if cfg.scenario == ScenarioKind::ViscositySweep {
            cfg.landau.get_or_insert_with(LandauConfig::default);
        }
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn require(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.fail(field, message);
        }
    }

    fn positive(&mut self, x: f64, field: &str) {
        self.require(x > 0.0 && x.is_finite(), field, format!("must be positive and finite, got {x}"));
    }

    fn nonnegative(&mut self, x: f64, field: &str) {
        self.require(x >= 0.0 && x.is_finite(), field, format!("must be nonnegative and finite, got {x}"));
    }

    fn expr(&mut self, src: &str, vars: &[&str], field: &str) -> Option<ScalarExpr> {
        match ScalarExpr::parse(src, vars) {
            Ok(e) => Some(e),
            Err(e) => {
                self.fail(field, format!("{e} (variables: {})", vars.join(", ")));
                None
            }
        }
    }

    fn unused(&mut self, present: bool, field: &str, scenario: ScenarioKind) {
        self.require(!present, field, format!("not used by scenario {}", scenario.name()));
    }
}

/// Every violation of the schema's value constraints.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut c = Checker(Vec::new());
    let kind = cfg.scenario;
    c.require(
        cfg.version == SCHEMA_VERSION,
        "version",
        format!("unsupported schema version {}, expected {SCHEMA_VERSION}", cfg.version),
    );
    let v = cfg.velocity;
    c.positive(v.half_width, "velocity.half_width");
    c.require(
        v.points >= 3 && v.points % 2 == 1,
        "velocity.points",
        format!("must be odd and at least 3, got {}", v.points),
    );
    let grid = VelocityGrid::new(v.half_width, v.points).ok();

    let uses_mode = kind.is_run();
    c.unused(cfg.slab.is_some() && !uses_mode, "slab", kind);
    c.unused(cfg.time.is_some() && !uses_mode, "time", kind);
    c.unused(cfg.solver.is_some() && !uses_mode, "solver", kind);
    c.unused(cfg.geometry.is_some() && kind != ScenarioKind::GeometryAudit, "geometry", kind);
    c.unused(cfg.stencil.is_some() && kind != ScenarioKind::StencilAudit, "stencil", kind);
    c.unused(cfg.sweep.is_some() && kind != ScenarioKind::ViscositySweep, "sweep", kind);
    c.unused(
        cfg.kfp.is_some() && !matches!(kind, ScenarioKind::KfpRun | ScenarioKind::LandauRun),
        "kfp",
        kind,
    );
    c.unused(
        cfg.landau.is_some() && matches!(kind, ScenarioKind::GeometryAudit | ScenarioKind::StencilAudit),
        "landau",
        kind,
    );

    match kind {
        ScenarioKind::KfpRun | ScenarioKind::LandauRun => {
            if cfg.kfp.is_some() == cfg.landau.is_some() {
                c.fail("kfp/landau", "exactly one mode block (kfp or landau) is required");
            } else if kind == ScenarioKind::KfpRun && cfg.kfp.is_none() {
                c.fail("kfp", "kfp_run needs a kfp block");
            } else if kind == ScenarioKind::LandauRun && cfg.landau.is_none() {
                c.fail("landau", "landau_run needs a landau block");
            }
        }
        ScenarioKind::ViscositySweep => match &cfg.sweep {
            None => c.fail("sweep", "viscosity_sweep needs a sweep block"),
            Some(s) => {
                c.require(s.nus.len() >= 2, "sweep.nus", "needs at least two viscosities");
                c.require(
                    s.nus.windows(2).all(|w| w[1] <= w[0]),
                    "sweep.nus",
                    "must be non-increasing",
                );
                for (i, nu) in s.nus.iter().enumerate() {
                    c.nonnegative(*nu, &format!("sweep.nus[{i}]"));
                }
            }
        },
        _ => {}
    }

    if uses_mode {
        match cfg.time {
            None => c.fail("time", "solver scenarios need a time block with dt and t_final"),
            Some(t) => {
                c.positive(t.dt, "time.dt");
                c.positive(t.t_final, "time.t_final");
            }
        }
        if let Some(s) = &cfg.slab {
            c.positive(s.length, "slab.length");
            c.require(s.cells >= 2, "slab.cells", format!("must be at least 2, got {}", s.cells));
        }
        let solver = cfg.solver.clone().unwrap_or_default();
        c.nonnegative(solver.lambda, "solver.lambda");
        c.require(
            (0.0..=1.0).contains(&solver.epsilon),
            "solver.epsilon",
            format!("must lie in [0, 1], got {}", solver.epsilon),
        );
        c.nonnegative(solver.theta_audit, "solver.theta_audit");
        c.positive(solver.cg_tol, "solver.cg_tol");
        c.require(solver.lanczos_steps >= 2, "solver.lanczos_steps", "must be at least 2");
        c.expr(&solver.initial, &INITIAL_VARS, "solver.initial");
        c.expr(&solver.source, &SOURCE_VARS, "solver.source");
        if let Some(ls) = solver.lambda_search {
            c.positive(ls.start, "solver.lambda_search.start");
            c.require(ls.factor > 1.0, "solver.lambda_search.factor", "must exceed 1");
            c.require(ls.max_tries >= 1, "solver.lambda_search.max_tries", "must be at least 1");
        }
    }

    if let Some(k) = &cfg.kfp {
        c.positive(k.delta, "kfp.delta");
        if let Some(d1) = k.delta1 {
            c.require(
                d1 >= 0.0 && d1 <= k.delta / 8.0,
                "kfp.delta1",
                format!("must lie in [0, δ/8] = [0, {}], got {d1}", k.delta / 8.0),
            );
        }
        let a: Vec<Option<ScalarExpr>> = k
            .a
            .iter()
            .enumerate()
            .map(|(i, s)| c.expr(s, &VELOCITY_VARS, &format!("kfp.a[{i}]")))
            .collect();
        for (i, s) in k.b.iter().enumerate() {
            c.expr(s, &VELOCITY_VARS, &format!("kfp.b[{i}]"));
        }
        if let (Some(grid), true) = (grid, a.iter().all(Option::is_some) && k.delta > 0.0) {
            let a: Vec<ScalarExpr> = a.into_iter().flatten().collect();
            if let Some(bad) = (0..grid.len()).find_map(|i| {
                let m = sym_at(&a, &grid.node(i));
                check_sym(&m, k.delta).err().map(|e| (grid.node(i), e))
            }) {
                c.fail("kfp.a", format!("not in Sym(δ) at v = {:?}: {}", bad.0, bad.1));
            }
        }
    }

    if let Some(l) = &cfg.landau {
        c.nonnegative(l.nu, "landau.nu");
        c.expr(&l.g, &VELOCITY_VARS, "landau.g");
        c.require(l.refine >= 1, "landau.refine", "must be at least 1");
        c.nonnegative(l.margin, "landau.margin");
        if kind == ScenarioKind::LandauRun {
            c.require(l.nu > 0.0, "landau.nu", "landau_run needs a positive viscosity");
        }
    }

    if let Some(g) = &cfg.geometry {
        c.positive(g.radius, "geometry.radius");
        c.require(!g.charts.is_empty(), "geometry.charts", "needs at least one chart");
        for (i, ch) in g.charts.iter().enumerate() {
            if let Err(e) = kinetex_core::geometry::BoundaryChart::new(ChartPreset::from(ch), g.radius.max(1e-12)) {
                c.fail(&format!("geometry.charts[{i}]"), e.to_string());
            }
        }
        c.positive(g.extension_delta, "geometry.extension_delta");
        if let Some(a) = g.antisymmetry {
            c.positive(a.half_width, "geometry.antisymmetry.half_width");
            c.require(
                a.coarse >= 2 && a.fine > a.coarse,
                "geometry.antisymmetry",
                "needs 2 ≤ coarse < fine",
            );
        }
    }

    if let Some(s) = &cfg.stencil {
        c.positive(s.delta, "stencil.delta");
        c.require(s.samples >= 1, "stencil.samples", "must be at least 1");
        if let Some(d1) = s.delta1 {
            c.require(
                d1 >= 0.0 && d1 <= s.delta / 8.0,
                "stencil.delta1",
                format!("must lie in [0, δ/8], got {d1}"),
            );
        }
    }
    c.0
}

/// `a(v)` from six entry expressions `[a11, a22, a33, a12, a13, a23]`.
pub fn sym_at(a: &[ScalarExpr], v: &[f64; 3]) -> SymMatrix3 {
    SymMatrix3 {
        entries: std::array::from_fn(|k| a[k].eval(v)),
    }
}

/// JSON schema of [`ScenarioConfig`].
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ScenarioConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes")
}
