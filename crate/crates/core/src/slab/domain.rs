//! Slab geometry `(0, L)` along `x3` and phase-space fields on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridField, VelocityGrid};
use crate::sym::Vec3;

/// Cell-centered slab `0 < x3 < L` with walls at both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabDomain {
    length: f64,
    cells: usize,
}

impl SlabDomain {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(format!("slab length must be positive, got {length}")));
        }
        if cells < 2 {
            return Err(Error::Config(format!("slab needs at least 2 cells, got {cells}")));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn center(&self, c: usize) -> f64 {
        (c as f64 + 0.5) * self.dx()
    }
}

/// Values `f(x_c, v)` stored cell-major: `values[c * grid.len() + node]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    pub slab: SlabDomain,
    pub grid: VelocityGrid,
    pub values: Vec<f64>,
    pub t: f64,
}

impl PhaseField {
    pub fn new(slab: SlabDomain, grid: VelocityGrid, values: Vec<f64>, t: f64) -> Result<Self> {
        if values.len() != slab.cells() * grid.len() {
            return Err(Error::Structure(format!(
                "{} values for {} cells of {} nodes",
                values.len(),
                slab.cells(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!("non-finite phase value at index {i}")));
        }
        Ok(Self { slab, grid, values, t })
    }

    pub fn zeros(slab: SlabDomain, grid: VelocityGrid) -> Self {
        Self {
            slab,
            grid,
            values: vec![0.0; slab.cells() * grid.len()],
            t: 0.0,
        }
    }

    /// Sample `f(x3, v)` at cell centers and velocity nodes.
    pub fn from_fn(slab: SlabDomain, grid: VelocityGrid, f: impl Fn(f64, &Vec3) -> f64) -> Self {
        let nodes: Vec<Vec3> = (0..grid.len()).map(|i| grid.node(i)).collect();
        let mut values = Vec::with_capacity(slab.cells() * grid.len());
        for c in 0..slab.cells() {
            let x = slab.center(c);
            values.extend(nodes.iter().map(|v| f(x, v)));
        }
        Self {
            slab,
            grid,
            values,
            t: 0.0,
        }
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn cell_field(&self, c: usize) -> GridField {
        GridField {
            grid: self.grid,
            values: self.cell(c).to_vec(),
            exterior: Default::default(),
        }
    }

    /// Phase-space volume element `dx h³`.
    pub fn cell_volume(&self) -> f64 {
        self.slab.dx() * self.grid.spacing().powi(3)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.slab != other.slab || self.grid != other.grid {
            return Err(Error::Structure("phase fields live on different grids".into()));
        }
        Ok(())
    }
}
