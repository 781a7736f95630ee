//! Numerics for kinetic Fokker-Planck and linearized Landau equations in
//! velocity space: monotone stencils, boundary charts, mirror extension,
//! Landau coefficients, weighted norms and a slab solver with runtime audits.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod landau;
pub mod mirror;
pub mod norms;
pub mod slab;
pub mod stencil;
pub mod sym;

pub use error::{Error, Result};
