//! Kinetic problems on the slab `(0, L) × [-V, V]³` with specular-type walls.

pub mod collision;
pub mod diagnostics;
pub mod domain;
pub mod linalg;
pub mod solver;
pub mod transport;

pub use collision::{
    collision_step, CollisionMode, CollisionStats, KfpModel, LandauModel, SolverConfig, SourceTerm, TimeScheme,
};
pub use diagnostics::{to_csv, StepDiagnostics, CSV_COLUMNS};
pub use domain::{PhaseField, SlabDomain};
pub use solver::{
    advance, find_lambda_threshold, l2_distance, run, run_with, vanishing_viscosity_sweep, LambdaSearch, RunOptions,
    RunOutput, RunSummary, SigmaAudit, Solver, SweepReport, ViscosityRun,
};
pub use transport::{transport_step, wall_traces, TraceRecord};
