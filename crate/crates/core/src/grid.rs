//! Truncated velocity lattice, scalar fields on it, and the finite-difference
//! operators `T_{h,l}`, `δ_{h,l}`, `Δ_{h,ξ}` and `A_h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sym::Vec3;

/// Cubic lattice `{-V + i h : 0 ≤ i < n}³` with `h = 2V/(n-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    half_width: f64,
    points: usize,
}

impl VelocityGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "velocity half-width must be positive, got {half_width}"
            )));
        }
        if points < 3 || points % 2 == 0 {
            return Err(Error::Config(format!(
                "points per axis must be odd and at least 3, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Index of the axis node at the origin.
    pub fn center(&self) -> usize {
        self.points / 2
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points + j) * self.points + k
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.points;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.multi_index(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Index of `node(idx) + h·l`, or `None` when it leaves the box.
    #[inline]
    pub fn neighbor(&self, idx: usize, l: &StencilDirection) -> Option<usize> {
        let m = self.multi_index(idx);
        let n = self.points as i64;
        let mut out = [0usize; 3];
        for a in 0..3 {
            let c = m[a] as i64 + l.0[a] as i64;
            if c < 0 || c >= n {
                return None;
            }
            out[a] = c as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }

    /// Whether the node lies at least `halo` cells away from every face.
    pub fn is_interior(&self, idx: usize, halo: usize) -> bool {
        let n = self.points;
        self.multi_index(idx)
            .iter()
            .all(|&c| c >= halo && c + halo < n)
    }

    /// Index of the node `R v` with `R = diag(1, 1, -1)`.
    #[inline]
    pub fn reflect_index(&self, idx: usize) -> usize {
        let [i, j, k] = self.multi_index(idx);
        self.index(i, j, self.points - 1 - k)
    }

    /// Nearest node to an arbitrary velocity, if inside the box.
    pub fn locate(&self, v: &Vec3) -> Option<usize> {
        let h = self.spacing();
        let mut m = [0usize; 3];
        for a in 0..3 {
            let c = ((v[a] + self.half_width) / h).round();
            if c < 0.0 || c > (self.points - 1) as f64 {
                return None;
            }
            m[a] = c as usize;
        }
        Some(self.index(m[0], m[1], m[2]))
    }
}

/// Integer lattice direction `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StencilDirection(pub [i32; 3]);

impl StencilDirection {
    pub fn new(l: [i32; 3]) -> Result<Self> {
        if l == [0, 0, 0] {
            return Err(Error::Config("stencil direction must be nonzero".into()));
        }
        Ok(Self(l))
    }

    pub const fn basis(axis: usize) -> Self {
        let mut l = [0; 3];
        l[axis] = 1;
        Self(l)
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn as_vec3(&self) -> Vec3 {
        [self.0[0] as f64, self.0[1] as f64, self.0[2] as f64]
    }

    pub fn norm_sq(&self) -> i32 {
        self.0.iter().map(|c| c * c).sum()
    }
}

/// How a field is continued outside `[-V, V]³`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExteriorPolicy {
    #[default]
    ZeroExtension,
}

/// Real values on every node of a [`VelocityGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: VelocityGrid,
    pub values: Vec<f64>,
    pub exterior: ExteriorPolicy,
}

impl GridField {
    pub fn new(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Data(format!("non-finite value at node {i}")));
        }
        Ok(Self {
            grid,
            values,
            exterior: ExteriorPolicy::ZeroExtension,
        })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: VelocityGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
            exterior: ExteriorPolicy::ZeroExtension,
        }
    }

    pub fn from_fn(grid: VelocityGrid, f: impl Fn(&Vec3) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self {
            grid,
            values,
            exterior: ExteriorPolicy::ZeroExtension,
        }
    }

    /// Value at signed lattice coordinates, zero outside the box.
    pub fn at(&self, m: [i64; 3]) -> f64 {
        let n = self.grid.points() as i64;
        if m.iter().any(|&c| c < 0 || c >= n) {
            return 0.0;
        }
        self.values[self.grid.index(m[0] as usize, m[1] as usize, m[2] as usize)]
    }

    /// Value at an arbitrary node-aligned velocity; zero outside the box.
    pub fn eval(&self, v: &Vec3) -> f64 {
        match self.grid.locate(v) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
            exterior: self.exterior,
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            exterior: self.exterior,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute value over nodes at least `halo` cells from the faces.
    pub fn interior_max_abs(&self, halo: usize) -> f64 {
        (0..self.values.len())
            .filter(|&i| self.grid.is_interior(i, halo))
            .fold(0.0_f64, |m, i| m.max(self.values[i].abs()))
    }

    /// `Σ u φ h³`.
    pub fn inner(&self, other: &Self) -> f64 {
        let h = self.grid.spacing();
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * h
            * h
            * h
    }
}

pub(crate) fn same_grid(a: &VelocityGrid, b: &VelocityGrid) -> Result<()> {
    if a != b {
        return Err(Error::Structure(format!(
            "grid mismatch: (V={}, n={}) vs (V={}, n={})",
            a.half_width(),
            a.points(),
            b.half_width(),
            b.points()
        )));
    }
    Ok(())
}

fn lattice_steps(grid: &VelocityGrid, h_step: f64) -> Result<i64> {
    let h = grid.spacing();
    let m = (h_step / h).round();
    if !h_step.is_finite() || m == 0.0 || (h_step - m * h).abs() > 1e-9 * h {
        return Err(Error::Config(format!(
            "step {h_step} is not a nonzero integer multiple of the grid spacing {h}"
        )));
    }
    Ok(m as i64)
}

fn shift_by(u: &GridField, m: i64, l: &StencilDirection) -> GridField {
    let g = u.grid;
    let values = (0..g.len())
        .map(|idx| {
            let c = g.multi_index(idx);
            u.at([
                c[0] as i64 + m * l.0[0] as i64,
                c[1] as i64 + m * l.0[1] as i64,
                c[2] as i64 + m * l.0[2] as i64,
            ])
        })
        .collect();
    GridField {
        grid: g,
        values,
        exterior: u.exterior,
    }
}

/// `(T_{h,l} u)(v) = u(v + h l)`.
pub fn shift(u: &GridField, h_step: f64, l: &StencilDirection) -> Result<GridField> {
    let m = lattice_steps(&u.grid, h_step)?;
    Ok(shift_by(u, m, l))
}

/// `δ_{h,l} u = (u(v + h l) - u(v)) / h`.
pub fn first_diff(u: &GridField, h_step: f64, l: &StencilDirection) -> Result<GridField> {
    let t = shift(u, h_step, l)?;
    t.zip_with(u, |a, b| (a - b) / h_step)
}

/// `Δ_{h,ξ} u = (u(v + h ξ) - 2u(v) + u(v - h ξ)) / h²`.
pub fn second_diff(u: &GridField, h_step: f64, xi: &StencilDirection) -> Result<GridField> {
    let m = lattice_steps(&u.grid, h_step)?;
    let p = shift_by(u, m, xi);
    let q = shift_by(u, -m, xi);
    let h2 = h_step * h_step;
    let values = (0..u.values.len())
        .map(|i| (p.values[i] - 2.0 * u.values[i] + q.values[i]) / h2)
        .collect();
    Ok(GridField {
        grid: u.grid,
        values,
        exterior: u.exterior,
    })
}

/// `A_h u = -Σ_k δ_{h,-l_k}(a_k δ_{h,l_k} u)` with zero extension outside the box.
pub fn apply_ah(u: &GridField, weights: &[GridField], dirs: &[StencilDirection]) -> Result<GridField> {
    let op = AhOperator::new(u.grid, dirs.to_vec(), weights, FluxBoundary::ZeroExtension)?;
    Ok(GridField {
        grid: u.grid,
        values: op.apply(&u.values),
        exterior: u.exterior,
    })
}

/// Treatment of stencil edges that leave the velocity box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxBoundary {
    /// Exterior values are zero; edges leaving the box act as a sink.
    #[default]
    ZeroExtension,
    /// Edges leaving the box carry no flux; constants are annihilated exactly.
    NoFlux,
}

/// Matrix-free `A_h` with per-node weights, reusable across applications.
#[derive(Clone, Debug)]
pub struct AhOperator {
    grid: VelocityGrid,
    dirs: Vec<StencilDirection>,
    /// `weights[k][node]` already divided by `h²`.
    scaled: Vec<Vec<f64>>,
    /// `edges[k][node]` is the neighbor along `l_k`, if inside the box.
    edges: Vec<Vec<Option<usize>>>,
    boundary: FluxBoundary,
}

impl AhOperator {
    pub fn new(
        grid: VelocityGrid,
        dirs: Vec<StencilDirection>,
        weights: &[GridField],
        boundary: FluxBoundary,
    ) -> Result<Self> {
        if weights.len() != dirs.len() {
            return Err(Error::Structure(format!(
                "{} weight fields for {} directions",
                weights.len(),
                dirs.len()
            )));
        }
        for w in weights {
            same_grid(&grid, &w.grid)?;
        }
        let raw: Vec<Vec<f64>> = weights.iter().map(|w| w.values.clone()).collect();
        Ok(Self::from_raw(grid, dirs, raw, boundary))
    }

    /// Build from raw per-node weight vectors (`raw[k].len() == grid.len()`).
    pub fn from_raw(
        grid: VelocityGrid,
        dirs: Vec<StencilDirection>,
        raw: Vec<Vec<f64>>,
        boundary: FluxBoundary,
    ) -> Self {
        let h = grid.spacing();
        let inv_h2 = 1.0 / (h * h);
        let scaled = raw
            .into_iter()
            .map(|w| w.into_iter().map(|x| x * inv_h2).collect())
            .collect();
        let edges = dirs
            .iter()
            .map(|l| (0..grid.len()).map(|i| grid.neighbor(i, l)).collect())
            .collect();
        Self {
            grid,
            dirs,
            scaled,
            edges,
            boundary,
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn dirs(&self) -> &[StencilDirection] {
        &self.dirs
    }

    /// Apply to raw node values.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (w, e) in self.scaled.iter().zip(&self.edges) {
            for idx in 0..u.len() {
                match e[idx] {
                    Some(j) => {
                        let flux = w[idx] * (u[j] - u[idx]);
                        out[idx] += flux;
                        out[j] -= flux;
                    }
                    None => {
                        if self.boundary == FluxBoundary::ZeroExtension {
                            out[idx] -= w[idx] * u[idx];
                        }
                    }
                }
            }
        }
    }

    /// Diagonal of the matrix of `A_h` (non-positive for nonnegative weights).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.grid.len()];
        for (w, e) in self.scaled.iter().zip(&self.edges) {
            for idx in 0..d.len() {
                match e[idx] {
                    Some(j) => {
                        d[idx] -= w[idx];
                        d[j] -= w[idx];
                    }
                    None => {
                        if self.boundary == FluxBoundary::ZeroExtension {
                            d[idx] -= w[idx];
                        }
                    }
                }
            }
        }
        d
    }

    /// `Σ_k Σ_v a_k(v) |δ_{h,l_k} u(v)|² m(v)` over edges kept by the boundary policy.
    pub fn dirichlet_form(&self, u: &[f64], node_weight: &[f64]) -> f64 {
        let mut s = 0.0;
        for (w, e) in self.scaled.iter().zip(&self.edges) {
            for idx in 0..u.len() {
                let d = match e[idx] {
                    Some(j) => u[j] - u[idx],
                    None if self.boundary == FluxBoundary::ZeroExtension => -u[idx],
                    None => continue,
                };
                s += w[idx] * d * d * node_weight[idx];
            }
        }
        s
    }

    /// Sum of `|δ_{h,l_k} u|² m(v)` over directions, weights ignored.
    pub fn difference_energy(&self, u: &[f64], node_weight: &[f64]) -> f64 {
        let h = self.grid.spacing();
        let mut s = 0.0;
        for e in &self.edges {
            for idx in 0..u.len() {
                if let Some(j) = e[idx] {
                    let d = (u[j] - u[idx]) / h;
                    s += d * d * node_weight[idx];
                }
            }
        }
        s
    }

    /// Spectral radius bound `max_v Σ_k 2|a_k|/h²·2` used by explicit stepping.
    pub fn gershgorin_bound(&self) -> f64 {
        let d = self.diagonal();
        let mut off = vec![0.0; d.len()];
        for (w, e) in self.scaled.iter().zip(&self.edges) {
            for idx in 0..d.len() {
                if let Some(j) = e[idx] {
                    off[idx] += w[idx].abs();
                    off[j] += w[idx].abs();
                }
            }
        }
        d.iter()
            .zip(&off)
            .fold(0.0_f64, |m, (a, b)| m.max(a.abs() + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::{decompose_default, default_stencil};
    use crate::sym::SymMatrix3;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng};

    fn grid(n: usize) -> VelocityGrid {
        VelocityGrid::new(2.0, n).unwrap()
    }

    fn random_field(g: VelocityGrid, seed: u64) -> GridField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GridField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Random field vanishing within two cells of the faces.
    fn compact_field(g: VelocityGrid, seed: u64) -> GridField {
        let mut f = random_field(g, seed);
        for i in 0..g.len() {
            if !g.is_interior(i, 2) {
                f.values[i] = 0.0;
            }
        }
        f
    }

    #[test]
    fn grid_rejects_even_or_small_sizes() {
        assert!(VelocityGrid::new(1.0, 4).is_err());
        assert!(VelocityGrid::new(1.0, 1).is_err());
        assert!(VelocityGrid::new(0.0, 5).is_err());
        let g = grid(9);
        assert_eq!(g.coord(g.center()), 0.0);
        assert_eq!(g.spacing(), 0.5);
    }

    #[test]
    fn shift_moves_indicator_down_one_node() {
        let g = grid(7);
        let c = g.center();
        let mut u = GridField::zeros(g);
        u.values[g.index(c, c, c)] = 1.0;
        let s = shift(&u, g.spacing(), &StencilDirection::basis(2)).unwrap();
        let nz: Vec<usize> = (0..g.len()).filter(|&i| s.values[i] != 0.0).collect();
        assert_eq!(nz, vec![g.index(c, c, c - 1)]);
    }

    #[test]
    fn shift_of_linear_field_adds_h() {
        let g = grid(7);
        let u = GridField::from_fn(g, |v| v[0]);
        let s = shift(&u, g.spacing(), &StencilDirection::basis(0)).unwrap();
        for i in (0..g.len()).filter(|&i| g.is_interior(i, 1)) {
            assert!((s.values[i] - u.values[i] - g.spacing()).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_rejects_off_lattice_steps() {
        let g = grid(7);
        let u = GridField::constant(g, 1.0);
        assert!(matches!(
            shift(&u, 0.3 * g.spacing(), &StencilDirection::basis(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn first_diff_exact_on_linear() {
        let g = grid(9);
        let u = GridField::from_fn(g, |v| v[0]);
        let d = first_diff(&u, g.spacing(), &StencilDirection::basis(0)).unwrap();
        for i in (0..g.len()).filter(|&i| g.is_interior(i, 1)) {
            assert!((d.values[i] - 1.0).abs() < 1e-13);
        }
        let c = first_diff(&GridField::constant(g, 3.0), g.spacing(), &StencilDirection::basis(1))
            .unwrap();
        assert!(c.interior_max_abs(1) == 0.0);
    }

    #[test]
    fn second_diff_exact_on_quadratics() {
        let g = grid(9);
        let h = g.spacing();
        let sq = GridField::from_fn(g, |v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        let d = second_diff(&sq, h, &StencilDirection::basis(0)).unwrap();
        let mixed = GridField::from_fn(g, |v| v[0] * v[1]);
        let m = second_diff(&mixed, h, &StencilDirection([1, 1, 0])).unwrap();
        for i in (0..g.len()).filter(|&i| g.is_interior(i, 1)) {
            assert!((d.values[i] - 2.0).abs() < 1e-12);
            assert!((m.values[i] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ah_of_square_norm_is_six() {
        let g = grid(11);
        let dec = decompose_default(&SymMatrix3::identity(), 0.5).unwrap();
        let w: Vec<GridField> = dec.weights.iter().map(|&l| GridField::constant(g, l)).collect();
        let u = GridField::from_fn(g, |v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        let r = apply_ah(&u, &w, &dec.dirs).unwrap();
        for i in (0..g.len()).filter(|&i| g.is_interior(i, 1)) {
            assert!((r.values[i] - 6.0).abs() < 1e-11);
        }
        let c = apply_ah(&GridField::constant(g, 2.0), &w, &dec.dirs).unwrap();
        assert!(c.interior_max_abs(1) < 1e-12);
    }

    #[test]
    fn ah_rejects_length_mismatch() {
        let g = grid(5);
        let u = GridField::zeros(g);
        let w = vec![GridField::constant(g, 1.0)];
        assert!(matches!(
            apply_ah(&u, &w, &default_stencil()),
            Err(Error::Structure(_))
        ));
        let other = vec![GridField::constant(grid(7), 1.0)];
        assert!(matches!(
            apply_ah(&u, &other, &[StencilDirection::basis(0)]),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn noflux_annihilates_constants_everywhere() {
        let g = grid(7);
        let dirs = default_stencil();
        let raw = vec![vec![0.3; g.len()]; dirs.len()];
        let op = AhOperator::from_raw(g, dirs, raw, FluxBoundary::NoFlux);
        let r = op.apply(&vec![1.7; g.len()]);
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn diagonal_matches_unit_vector_probe() {
        let g = grid(5);
        let dirs = default_stencil();
        let f = random_field(g, 3);
        let raw: Vec<Vec<f64>> = dirs.iter().map(|_| f.values.iter().map(|x| x.abs()).collect()).collect();
        for boundary in [FluxBoundary::ZeroExtension, FluxBoundary::NoFlux] {
            let op = AhOperator::from_raw(g, dirs.clone(), raw.clone(), boundary);
            let d = op.diagonal();
            for idx in [0, 13, 62, g.len() - 1] {
                let mut e = vec![0.0; g.len()];
                e[idx] = 1.0;
                assert!((op.apply(&e)[idx] - d[idx]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn product_rule_holds_nodewise(s1 in 0u64..1000, s2 in 0u64..1000, dir in 0usize..9) {
            let g = grid(7);
            let h = g.spacing();
            let l = default_stencil()[dir];
            let f = random_field(g, s1);
            let q = random_field(g, s2 + 5000);
            let fq = f.zip_with(&q, |a, b| a * b).unwrap();
            let lhs = first_diff(&fq, h, &l).unwrap();
            let df = first_diff(&f, h, &l).unwrap();
            let dq = first_diff(&q, h, &l).unwrap();
            let tf = shift(&f, h, &l).unwrap();
            for i in 0..g.len() {
                let rhs = q.values[i] * df.values[i] + tf.values[i] * dq.values[i];
                prop_assert!((lhs.values[i] - rhs).abs() < 1e-12);
            }
        }

        #[test]
        fn summation_by_parts(s1 in 0u64..1000, s2 in 0u64..1000) {
            let g = grid(9);
            let h = g.spacing();
            let dirs = default_stencil();
            let w: Vec<GridField> = (0..dirs.len())
                .map(|k| random_field(g, 77 + k as u64).map(|x| 1.0 + 0.5 * x))
                .collect();
            let u = compact_field(g, s1);
            let phi = compact_field(g, s2 + 9000);
            let au = apply_ah(&u, &w, &dirs).unwrap();
            let lhs = au.inner(&phi);
            let mut rhs = 0.0;
            for (a, l) in w.iter().zip(&dirs) {
                let du = first_diff(&u, h, l).unwrap();
                let dp = first_diff(&phi, h, l).unwrap();
                rhs += (0..g.len()).map(|i| a.values[i] * du.values[i] * dp.values[i]).sum::<f64>();
            }
            rhs *= h * h * h;
            prop_assert!((lhs + rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
            // nonnegative weights make -A_h positive semidefinite
            let uu = au.inner(&u);
            prop_assert!(uu <= 1e-12);
        }
    }
}
