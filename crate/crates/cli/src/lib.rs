//! Scenario runner: parse a scenario file, run it, write `summary.json` and
//! artifacts, and map the outcome to an exit code.

pub mod config;
pub mod report;
pub mod scenario;
pub mod seeds;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{parse_config, parse_str, ConfigError, ScenarioConfig, ScenarioKind};
pub use report::{emit_reports, Check, Manifest, OutputRecord};
pub use scenario::run_scenario;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const AUDIT_FAILED: i32 = 1;
    pub const MISSING_FILE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const SCHEMA: i32 = 4;
    pub const RUNTIME: i32 = 5;
    pub const USAGE: i32 = 64;
}

pub const DEFAULT_OUT: &str = "kinetex-out";

#[derive(Parser, Debug)]
#[command(name = "kinetex", version, about = "Kinetic Fokker-Planck and Landau scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunFlags {
    /// Output directory (overrides `output_dir` in the file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed (overrides `seed` in the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file (TOML or JSON).
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a built-in audit with default settings.
    Audit {
        kind: AuditKind,
        /// Velocity half-width `V`.
        #[arg(long)]
        half_width: Option<f64>,
        /// Velocity nodes per axis (odd).
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Parse and validate a scenario file, printing it with defaults filled in.
    Check { config: PathBuf },
    /// Print the JSON schema of scenario files.
    Schema,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AuditKind {
    Geometry,
    Stencil,
    Landau,
}

impl AuditKind {
    fn scenario(self) -> ScenarioKind {
        match self {
            AuditKind::Geometry => ScenarioKind::GeometryAudit,
            AuditKind::Stencil => ScenarioKind::StencilAudit,
            AuditKind::Landau => ScenarioKind::LandauBuild,
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match cli.command {
        Command::Schema => {
            println!("{}", config::schema_json());
            exit::OK
        }
        Command::Check { config } => match parse_config(&config) {
            Ok(cfg) => {
                print!("{}", config::to_toml(&cfg));
                exit::OK
            }
            Err(e) => config_failure(&e),
        },
        Command::Run { config, flags } => match parse_config(&config) {
            Ok(cfg) => execute(cfg, &flags),
            Err(e) => config_failure(&e),
        },
        Command::Audit {
            kind,
            half_width,
            points,
            flags,
        } => {
            let mut text = format!("version = 1\nscenario = \"{}\"\n", kind.scenario().name());
            if half_width.is_some() || points.is_some() {
                text.push_str("[velocity]\n");
                if let Some(v) = half_width {
                    text.push_str(&format!("half_width = {v:?}\n"));
                }
                if let Some(n) = points {
                    text.push_str(&format!("points = {n}\n"));
                }
            }
            match parse_str(&text, config::Format::Toml, Path::new("<audit>")) {
                Ok(cfg) => execute(cfg, &flags),
                Err(e) => config_failure(&e),
            }
        }
    }
}

fn config_failure(e: &ConfigError) -> i32 {
    eprintln!("error: {e}");
    match e {
        ConfigError::Missing { .. } => exit::MISSING_FILE,
        ConfigError::Parse { .. } => exit::PARSE,
        ConfigError::Schema { .. } => exit::SCHEMA,
    }
}

fn execute(mut cfg: ScenarioConfig, flags: &RunFlags) -> i32 {
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    let out = flags
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let result = match flags.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run_scenario(&cfg)),
            Err(e) => {
                eprintln!("error: cannot start {n} worker threads: {e}");
                return exit::RUNTIME;
            }
        },
        None => run_scenario(&cfg),
    };
    let record = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::RUNTIME;
        }
    };
    for c in &record.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("{mark} {} ({}): {:.3e} {:?} {:.3e}", c.name, c.audit, c.value, c.comparison, c.tolerance);
    }
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    match emit_reports(&record, &out) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest).expect("manifests serialize"));
            if record.passed {
                exit::OK
            } else {
                exit::AUDIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::RUNTIME
        }
    }
}
