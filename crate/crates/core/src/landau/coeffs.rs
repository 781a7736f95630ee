//! Coefficient tables `σ`, `σ_G`, `a_g`, the multiplier of `J_g`, and the
//! nonlocal operator `K̄_g = 𝖪 + J_g` on a velocity grid.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fft::{LatticeConvolver, Parity, Term};
use super::kernel::{div_phi_weight, maxwellian, phi_weight, sqrt_maxwellian};
use crate::error::{Error, Result};
use crate::grid::{same_grid, GridField, VelocityGrid};
use crate::sym::{bracket, SymMatrix3, Vec3, SYM_PAIRS};

/// Table quadrature: lattice spacing `h/refine`, extended `margin` beyond the grid box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub refine: usize,
    pub margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            refine: 2,
            margin: 4.0,
        }
    }
}

/// Maxwellian sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellianTable {
    pub field: GridField,
}

impl MaxwellianTable {
    pub fn new(grid: VelocityGrid) -> Self {
        Self {
            field: GridField::from_fn(grid, maxwellian),
        }
    }
}

/// `σ = Φ ∗ μ` and `∂_i σ^{ij}` on grid nodes.
#[derive(Clone, Debug)]
pub struct SigmaTable {
    pub grid: VelocityGrid,
    pub sigma: Vec<SymMatrix3>,
    pub div: Vec<Vec3>,
    /// Largest Maxwellian value on the outer faces of the quadrature lattice.
    pub tail: f64,
    pub warning: Option<String>,
}

const MAXWELLIAN_SUPPORT: f64 = 6.0;

fn phi_kernels(h: f64) -> Vec<Box<dyn Fn([i64; 3]) -> f64 + Sync>> {
    SYM_PAIRS
        .iter()
        .map(|&(i, j)| Box::new(move |m: [i64; 3]| phi_weight(m, h, i, j)) as Box<dyn Fn([i64; 3]) -> f64 + Sync>)
        .collect()
}

fn sym_slot(i: usize, j: usize) -> usize {
    SYM_PAIRS
        .iter()
        .position(|&(a, b)| (a, b) == (i.min(j), i.max(j)))
        .expect("valid index pair")
}

/// Tabulate `σ` and its divergence by FFT convolution on a refined lattice.
pub fn compute_sigma(grid: &VelocityGrid, quad: &QuadratureSpec) -> Result<SigmaTable> {
    if quad.refine == 0 || !(quad.margin >= 0.0) {
        return Err(Error::Config(format!("invalid quadrature spec {quad:?}")));
    }
    let r = quad.refine;
    let n = grid.points();
    let hf = grid.spacing() / r as f64;
    // beyond |v_i| = 6 the Maxwellian is below 1e-16 and only inflates the transform
    let extent = (grid.half_width() + quad.margin).min(grid.half_width().max(MAXWELLIAN_SUPPORT));
    let q = ((extent - grid.half_width()) / hf - 1e-9).ceil().max(0.0) as usize;
    let no = r * (n - 1) + 1;
    let ns = no + 2 * q;
    let origin = -grid.half_width() - q as f64 * hf;
    let kernels = phi_kernels(hf);
    let refs: Vec<(Parity, &(dyn Fn([i64; 3]) -> f64 + Sync))> =
        kernels.iter().map(|k| (Parity::Even, k.as_ref())).collect();
    let conv = LatticeConvolver::new(ns, no, q as i64, &refs);

    let len = ns * ns * ns;
    let mut sources = vec![vec![0.0; len]; 4];
    let mut tail = 0.0_f64;
    for a in 0..ns {
        for b in 0..ns {
            for c in 0..ns {
                let v = [
                    origin + a as f64 * hf,
                    origin + b as f64 * hf,
                    origin + c as f64 * hf,
                ];
                let m = maxwellian(&v);
                let idx = (a * ns + b) * ns + c;
                sources[0][idx] = m;
                for k in 0..3 {
                    sources[1 + k][idx] = v[k] * m;
                }
                if [a, b, c].iter().any(|&x| x == 0 || x == ns - 1) {
                    tail = tail.max(m);
                }
            }
        }
    }
    let mut terms: Vec<Term> = (0..6)
        .map(|e| Term {
            out: e,
            kernel: e,
            src: 0,
            coeff: 1.0,
        })
        .collect();
    for j in 0..3 {
        for i in 0..3 {
            terms.push(Term {
                out: 6 + j,
                kernel: sym_slot(i, j),
                src: 1 + i,
                coeff: -2.0,
            });
        }
    }
    let srefs: Vec<&[f64]> = sources.iter().map(|s| s.as_slice()).collect();
    let outs = conv.convolve(&srefs, &terms, 9);

    let mut sigma = Vec::with_capacity(grid.len());
    let mut div = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let [i, j, k] = grid.multi_index(idx);
        let f = ((i * r) * no + j * r) * no + k * r;
        let mut e = [0.0; 6];
        for (s, x) in e.iter_mut().enumerate() {
            *x = outs[s][f];
        }
        sigma.push(SymMatrix3 { entries: e });
        div.push([outs[6][f], outs[7][f], outs[8][f]]);
    }
    let warning = (quad.margin < 4.0 || tail > 1e-7).then(|| {
        format!(
            "quadrature margin {} leaves Maxwellian tail {tail:.3e} on the lattice faces",
            quad.margin
        )
    });
    Ok(SigmaTable {
        grid: *grid,
        sigma,
        div,
        tail,
        warning,
    })
}

/// Perturbation `g` entering `σ_G`, `a_g` and `J_g`.
#[derive(Clone)]
pub enum GSource {
    Zero,
    /// Closed-form `g` and `∇g`, sampled on grid nodes.
    Analytic {
        g: Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>,
        grad: Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>,
    },
    /// Grid values; the gradient defaults to central differences.
    Grid {
        g: GridField,
        grad: Option<[GridField; 3]>,
    },
}

impl std::fmt::Debug for GSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GSource::Zero => write!(f, "Zero"),
            GSource::Analytic { .. } => write!(f, "Analytic"),
            GSource::Grid { .. } => write!(f, "Grid"),
        }
    }
}

impl GSource {
    fn sample(&self, grid: &VelocityGrid) -> Result<Option<(Vec<f64>, [Vec<f64>; 3])>> {
        match self {
            GSource::Zero => Ok(None),
            GSource::Analytic { g, grad } => {
                let vals: Vec<f64> = (0..grid.len()).map(|i| g(&grid.node(i))).collect();
                let gr: Vec<Vec3> = (0..grid.len()).map(|i| grad(&grid.node(i))).collect();
                Ok(Some((vals, std::array::from_fn(|k| gr.iter().map(|x| x[k]).collect()))))
            }
            GSource::Grid { g, grad } => {
                same_grid(grid, &g.grid)?;
                let gr = match grad {
                    Some(d) => {
                        for x in d {
                            same_grid(grid, &x.grid)?;
                        }
                        d.clone()
                    }
                    None => central_gradient(g),
                };
                Ok(Some((g.values.clone(), gr.map(|x| x.values))))
            }
        }
    }
}

/// Central differences `(u(v + h e_k) - u(v - h e_k)) / 2h` with zero extension.
pub fn central_gradient(u: &GridField) -> [GridField; 3] {
    let g = u.grid;
    let h = g.spacing();
    std::array::from_fn(|k| {
        let values = (0..g.len())
            .map(|idx| {
                let m = g.multi_index(idx).map(|x| x as i64);
                let mut p = m;
                let mut q = m;
                p[k] += 1;
                q[k] -= 1;
                (u.at(p) - u.at(q)) / (2.0 * h)
            })
            .collect();
        GridField {
            grid: g,
            values,
            exterior: u.exterior,
        }
    })
}

/// FFT convolutions on the grid lattice used by `𝖪` and the `g` terms.
pub struct GridConvolver {
    grid: VelocityGrid,
    conv: LatticeConvolver,
}

impl std::fmt::Debug for GridConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridConvolver").field("grid", &self.grid).finish()
    }
}

/// Kernel slots: `0..6` are `Φ^{ij}`, `6..9` are `∂_i Φ^{ij}` for `j = 0, 1, 2`.
const DIV_SLOT: usize = 6;

impl GridConvolver {
    pub fn new(grid: &VelocityGrid) -> Self {
        let h = grid.spacing();
        let mut kernels = phi_kernels(h);
        for j in 0..3 {
            kernels.push(Box::new(move |m: [i64; 3]| div_phi_weight(m, h, j)));
        }
        let refs: Vec<(Parity, &(dyn Fn([i64; 3]) -> f64 + Sync))> = kernels
            .iter()
            .enumerate()
            .map(|(s, k)| (if s < DIV_SLOT { Parity::Even } else { Parity::Odd }, k.as_ref()))
            .collect();
        let n = grid.points();
        Self {
            grid: *grid,
            conv: LatticeConvolver::new(n, n, 0, &refs),
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    fn run(&self, sources: &[&[f64]], terms: &[Term], n_out: usize) -> Vec<Vec<f64>> {
        debug_assert!(sources.iter().all(|s| s.len() == self.conv.source_len()));
        self.conv.convolve(sources, terms, n_out)
    }

    /// `Φ ∗ s` as a symmetric-matrix field.
    pub fn phi_matrix(&self, s: &[f64]) -> Vec<SymMatrix3> {
        let terms: Vec<Term> = (0..6)
            .map(|e| Term {
                out: e,
                kernel: e,
                src: 0,
                coeff: 1.0,
            })
            .collect();
        let o = self.run(&[s], &terms, 6);
        (0..s.len())
            .map(|i| SymMatrix3 {
                entries: std::array::from_fn(|e| o[e][i]),
            })
            .collect()
    }

    /// `(Φ ∗ s)_i = Σ_j Φ^{ij} ∗ s_j` for a vector source.
    pub fn phi_vector(&self, s: [&[f64]; 3]) -> [Vec<f64>; 3] {
        let mut terms = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                terms.push(Term {
                    out: i,
                    kernel: sym_slot(i, j),
                    src: j,
                    coeff: 1.0,
                });
            }
        }
        let mut o = self.run(&s, &terms, 3).into_iter();
        std::array::from_fn(|_| o.next().expect("three outputs"))
    }
}

/// Every coefficient of the linearized Landau operator around `μ + μ^{1/2} g`.
#[derive(Debug)]
pub struct LandauCoefficientSet {
    pub grid: VelocityGrid,
    pub sigma: Vec<SymMatrix3>,
    pub sigma_div: Vec<Vec3>,
    pub sigma_g: Vec<SymMatrix3>,
    pub a_g: Vec<Vec3>,
    /// Pointwise multiplier `m_g` with `J_g f = m_g f`.
    pub j_multiplier: Vec<f64>,
    /// Sampled `g` (zero when absent).
    pub g: GridField,
    pub tail: f64,
    pub warning: Option<String>,
    conv: GridConvolver,
    sqrt_mu: Vec<f64>,
    mu: Vec<f64>,
}

/// Sup norms of the drift and of the `σ_G` gradient on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBounds {
    pub max_a_g: f64,
    pub max_grad_a_g: f64,
    pub max_grad_sigma_g: f64,
    pub min_eig_sigma_g: f64,
}

impl LandauCoefficientSet {
    pub fn build(grid: &VelocityGrid, g: &GSource, quad: &QuadratureSpec) -> Result<Self> {
        let table = compute_sigma(grid, quad)?;
        let conv = GridConvolver::new(grid);
        let nodes: Vec<Vec3> = (0..grid.len()).map(|i| grid.node(i)).collect();
        let sqrt_mu: Vec<f64> = nodes.iter().map(sqrt_maxwellian).collect();
        let mu: Vec<f64> = nodes.iter().map(maxwellian).collect();

        let mut j_multiplier: Vec<f64> = (0..grid.len())
            .map(|i| {
                let v = &nodes[i];
                let d = table.div[i];
                d[0] * v[0] + d[1] * v[1] + d[2] * v[2] + table.sigma[i].trace() - table.sigma[i].quad(v)
            })
            .collect();
        let mut sigma_g = table.sigma.clone();
        let mut a_g = vec![[0.0; 3]; grid.len()];
        let mut g_field = GridField::zeros(*grid);

        if let Some((gv, grad)) = g.sample(grid)? {
            let len = grid.len();
            let qg: Vec<f64> = (0..len).map(|i| sqrt_mu[i] * gv[i]).collect();
            let drift_src: [Vec<f64>; 3] = std::array::from_fn(|j| {
                (0..len)
                    .map(|i| sqrt_mu[i] * (nodes[i][j] * gv[i] + grad[j][i]))
                    .collect()
            });
            let qdg: [Vec<f64>; 3] =
                std::array::from_fn(|j| (0..len).map(|i| sqrt_mu[i] * grad[j][i]).collect());
            // Σ_ij Φ^{ij} ∗ (v_i μ^{1/2} ∂_j g), symmetrized over (i, j)
            let vqdg: Vec<Vec<f64>> = SYM_PAIRS
                .iter()
                .map(|&(a, b)| {
                    (0..len)
                        .map(|i| {
                            let s = nodes[i][a] * qdg[b][i];
                            if a == b {
                                s
                            } else {
                                s + nodes[i][b] * qdg[a][i]
                            }
                        })
                        .collect()
                })
                .collect();
            let mut sources: Vec<&[f64]> = vec![&qg];
            sources.extend(drift_src.iter().map(|s| s.as_slice()));
            sources.extend(qdg.iter().map(|s| s.as_slice()));
            sources.extend(vqdg.iter().map(|s| s.as_slice()));
            let mut terms = Vec::new();
            for e in 0..6 {
                terms.push(Term { out: e, kernel: e, src: 0, coeff: 1.0 });
            }
            for i in 0..3 {
                for j in 0..3 {
                    terms.push(Term { out: 6 + i, kernel: sym_slot(i, j), src: 1 + j, coeff: -1.0 });
                }
            }
            for j in 0..3 {
                terms.push(Term { out: 9, kernel: DIV_SLOT + j, src: 4 + j, coeff: -1.0 });
            }
            for e in 0..6 {
                terms.push(Term { out: 9, kernel: e, src: 7 + e, coeff: 1.0 });
            }
            let o = conv.run(&sources, &terms, 10);
            for i in 0..len {
                let extra = SymMatrix3 {
                    entries: std::array::from_fn(|e| o[e][i]),
                };
                sigma_g[i] = sigma_g[i].add(&extra);
                a_g[i] = [o[6][i], o[7][i], o[8][i]];
                j_multiplier[i] += o[9][i];
            }
            g_field = GridField::new(*grid, gv)?;
        }

        Ok(Self {
            grid: *grid,
            sigma: table.sigma,
            sigma_div: table.div,
            sigma_g,
            a_g,
            j_multiplier,
            g: g_field,
            tail: table.tail,
            warning: table.warning,
            conv,
            sqrt_mu,
            mu,
        })
    }

    pub fn convolver(&self) -> &GridConvolver {
        &self.conv
    }

    /// `𝖪 f = 2 v_i μ^{1/2} W_i + 8π μ f - 2 μ^{1/2} Σ_ij Φ^{ij} ∗ P_ij` with
    /// `W_i = Φ^{ij} ∗ (μ^{1/2}(∂_j f + v_j f))` and
    /// `P_ij = μ^{1/2}(δ_ij f - v_i v_j f + v_j ∂_i f)`.
    pub fn apply_k(&self, f: &[f64], grad: &[Vec<f64>; 3]) -> Result<Vec<f64>> {
        let len = self.grid.len();
        if f.len() != len || grad.iter().any(|g| g.len() != len) {
            return Err(Error::Structure("field length does not match the grid".into()));
        }
        let q = &self.sqrt_mu;
        let nodes: Vec<Vec3> = (0..len).map(|i| self.grid.node(i)).collect();
        let gsrc: [Vec<f64>; 3] = std::array::from_fn(|j| {
            (0..len).map(|i| q[i] * (grad[j][i] + nodes[i][j] * f[i])).collect()
        });
        let psrc: Vec<Vec<f64>> = SYM_PAIRS
            .iter()
            .map(|&(a, b)| {
                (0..len)
                    .map(|i| {
                        let v = &nodes[i];
                        let pab = (if a == b { f[i] } else { 0.0 }) - v[a] * v[b] * f[i] + v[b] * grad[a][i];
                        let s = if a == b {
                            pab
                        } else {
                            pab + (-v[a] * v[b] * f[i] + v[a] * grad[b][i])
                        };
                        q[i] * s
                    })
                    .collect()
            })
            .collect();
        let mut sources: Vec<&[f64]> = gsrc.iter().map(|s| s.as_slice()).collect();
        sources.extend(psrc.iter().map(|s| s.as_slice()));
        let mut terms = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                terms.push(Term { out: i, kernel: sym_slot(i, j), src: j, coeff: 1.0 });
            }
        }
        for e in 0..6 {
            terms.push(Term { out: 3, kernel: e, src: 3 + e, coeff: 1.0 });
        }
        let o = self.conv.run(&sources, &terms, 4);
        Ok((0..len)
            .map(|i| {
                let v = &nodes[i];
                let k1 = 2.0 * q[i] * (v[0] * o[0][i] + v[1] * o[1][i] + v[2] * o[2][i]);
                k1 + 8.0 * PI * self.mu[i] * f[i] - 2.0 * q[i] * o[3][i]
            })
            .collect())
    }

    /// `K̄_g f = 𝖪 f + J_g f`.
    pub fn apply_kbar(&self, f: &[f64], grad: &[Vec<f64>; 3]) -> Result<Vec<f64>> {
        let mut out = self.apply_k(f, grad)?;
        for (o, (m, x)) in out.iter_mut().zip(self.j_multiplier.iter().zip(f)) {
            *o += m * x;
        }
        Ok(out)
    }

    /// [`Self::apply_k`] on a field whose gradient is taken by central differences.
    pub fn apply_k_field(&self, f: &GridField) -> Result<GridField> {
        same_grid(&self.grid, &f.grid)?;
        let grad = central_gradient(f).map(|x| x.values);
        GridField::new(self.grid, self.apply_k(&f.values, &grad)?)
    }

    /// [`Self::apply_kbar`] on a field whose gradient is taken by central differences.
    pub fn apply_kbar_field(&self, f: &GridField) -> Result<GridField> {
        same_grid(&self.grid, &f.grid)?;
        let grad = central_gradient(f).map(|x| x.values);
        GridField::new(self.grid, self.apply_kbar(&f.values, &grad)?)
    }

    pub fn bounds(&self) -> CoefficientBounds {
        let h = self.grid.spacing();
        let mut b = CoefficientBounds {
            max_a_g: 0.0,
            max_grad_a_g: 0.0,
            max_grad_sigma_g: 0.0,
            min_eig_sigma_g: f64::INFINITY,
        };
        for idx in 0..self.grid.len() {
            let a = &self.a_g[idx];
            b.max_a_g = b.max_a_g.max(crate::sym::norm(a));
            b.min_eig_sigma_g = b.min_eig_sigma_g.min(self.sigma_g[idx].eigenvalues()[0]);
            for k in 0..3 {
                if let Some(j) = self.grid.neighbor(idx, &crate::grid::StencilDirection::basis(k)) {
                    let da = crate::sym::norm(&crate::sym::sub(&self.a_g[j], a)) / h;
                    let ds = self.sigma_g[j].sub(&self.sigma_g[idx]).max_abs() / h;
                    b.max_grad_a_g = b.max_grad_a_g.max(da);
                    b.max_grad_sigma_g = b.max_grad_sigma_g.max(ds);
                }
            }
        }
        b
    }
}

/// Fitted constants in `c1 ⟨v⟩⁻³ ≤ eigmin σ` and `eigmax σ ≤ c2 ⟨v⟩⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaBoundFit {
    pub c1: f64,
    pub c2: f64,
}

pub fn fit_sigma_bounds(grid: &VelocityGrid, sigma: &[SymMatrix3]) -> SigmaBoundFit {
    let mut fit = SigmaBoundFit {
        c1: f64::INFINITY,
        c2: 0.0,
    };
    for (idx, s) in sigma.iter().enumerate() {
        let jb = bracket(&grid.node(idx));
        let ev = s.eigenvalues();
        fit.c1 = fit.c1.min(ev[0] * jb.powi(3));
        fit.c2 = fit.c2.max(ev[2] * jb);
    }
    fit
}

/// `sup_v |σ_G(x1, v) - σ_G(x2, v)| / |x1 - x2|^{ϰ/3}` over sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderModulusReport {
    pub modulus: f64,
    pub exponent: f64,
    pub pairs: usize,
    /// `modulus / (1 + [g]_holder)`.
    pub fitted_n: f64,
}

/// `g_at(x)` returns the velocity profile of `g` at spatial point `x`.
pub fn sigma_holder_modulus(
    conv: &GridConvolver,
    g_at: impl Fn(&Vec3) -> GridField,
    pairs: &[(Vec3, Vec3)],
    kappa: f64,
    g_holder: f64,
) -> Result<HolderModulusReport> {
    let grid = *conv.grid();
    let q: Vec<f64> = (0..grid.len()).map(|i| sqrt_maxwellian(&grid.node(i))).collect();
    let mut modulus = 0.0_f64;
    let mut used = 0;
    for (x1, x2) in pairs {
        let dx = crate::sym::norm(&crate::sym::sub(x1, x2));
        if dx == 0.0 {
            continue;
        }
        let (g1, g2) = (g_at(x1), g_at(x2));
        same_grid(&grid, &g1.grid)?;
        same_grid(&grid, &g2.grid)?;
        let src: Vec<f64> = (0..grid.len()).map(|i| q[i] * (g1.values[i] - g2.values[i])).collect();
        let diff = conv.phi_matrix(&src);
        let sup = diff.iter().fold(0.0_f64, |m, s| m.max(s.max_abs()));
        modulus = modulus.max(sup / dx.powf(kappa / 3.0));
        used += 1;
    }
    Ok(HolderModulusReport {
        modulus,
        exponent: kappa,
        pairs: used,
        fitted_n: modulus / (1.0 + g_holder),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landau::kernel::sigma_at_origin;
    use crate::sym::dot;

    fn center(grid: &VelocityGrid) -> usize {
        let c = grid.center();
        grid.index(c, c, c)
    }

    fn zero_set(n: usize) -> LandauCoefficientSet {
        let grid = VelocityGrid::new(4.0, n).unwrap();
        LandauCoefficientSet::build(&grid, &GSource::Zero, &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn sigma_table_at_origin() {
        let set = zero_set(17);
        let s = set.sigma[center(&set.grid)];
        let exact = sigma_at_origin();
        for i in 0..3 {
            assert!((s.get(i, i) / exact - 1.0).abs() < 1e-3, "{s:?}");
        }
        assert!(s.get(0, 1).abs() < 1e-12 && s.get(0, 2).abs() < 1e-12);
        assert!(set.sigma_div[center(&set.grid)].iter().all(|d| d.abs() < 1e-12));
        // J_0 at the origin reduces to trace σ(0)
        assert!((set.j_multiplier[center(&set.grid)] - 3.0 * exact).abs() < 3e-3);
        assert!(set.warning.is_none(), "{:?}", set.warning);
    }

    #[test]
    fn small_margin_warns() {
        let grid = VelocityGrid::new(2.0, 9).unwrap();
        let t = compute_sigma(&grid, &QuadratureSpec { refine: 1, margin: 0.5 }).unwrap();
        assert!(t.warning.is_some());
        assert!(t.tail > 1e-7);
    }

    #[test]
    fn sigma_is_cube_equivariant() {
        let set = zero_set(17);
        let grid = set.grid;
        let n = grid.points();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut worst = 0.0_f64;
        for perm in perms {
            for signs in 0..8 {
                let sgn = |k: usize| if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
                for idx in 0..grid.len() {
                    let m = grid.multi_index(idx);
                    let mut pm = [0; 3];
                    for k in 0..3 {
                        pm[k] = if sgn(k) < 0.0 { n - 1 - m[perm[k]] } else { m[perm[k]] };
                    }
                    let img = set.sigma[grid.index(pm[0], pm[1], pm[2])];
                    let src = set.sigma[idx];
                    for a in 0..3 {
                        for b in 0..3 {
                            let expect = sgn(a) * sgn(b) * src.get(perm[a], perm[b]);
                            worst = worst.max((img.get(a, b) - expect).abs());
                        }
                    }
                }
            }
        }
        assert!(worst <= 1e-10, "{worst:e}");
    }

    #[test]
    fn sigma_bounds_are_positive() {
        let set = zero_set(17);
        let fit = fit_sigma_bounds(&set.grid, &set.sigma);
        assert!(fit.c1 > 0.0 && fit.c2.is_finite() && fit.c1 < fit.c2);
    }

    #[test]
    fn k_annihilates_sqrt_maxwellian() {
        // μ^{-1/2} Q[μ, μ] = 0, so 𝖪 μ^{1/2} vanishes up to discretization error
        let mut errs = vec![];
        for n in [9, 17] {
            let set = zero_set(n);
            let q = GridField::from_fn(set.grid, sqrt_maxwellian);
            let grad: [Vec<f64>; 3] = std::array::from_fn(|k| {
                (0..set.grid.len()).map(|i| -set.grid.node(i)[k] * q.values[i]).collect()
            });
            let kq = set.apply_k(&q.values, &grad).unwrap();
            errs.push(kq.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
        }
        assert!(errs[1] < 0.02, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn apply_k_matches_direct_sum() {
        let set = zero_set(7);
        let grid = set.grid;
        let h = grid.spacing();
        let f = GridField::from_fn(grid, |v| (1.0 + v[0] - 0.3 * v[1] * v[2]) * (-0.3 * dot(v, v)).exp());
        let grad = central_gradient(&f).map(|x| x.values);
        let got = set.apply_k(&f.values, &grad).unwrap();
        let conv = |a: usize, src: &dyn Fn(usize) -> f64, i: usize, j: usize| {
            let ma = grid.multi_index(a);
            (0..grid.len())
                .map(|b| {
                    let mb = grid.multi_index(b);
                    let m = std::array::from_fn(|k| ma[k] as i64 - mb[k] as i64);
                    phi_weight(m, h, i, j) * src(b)
                })
                .sum::<f64>()
        };
        let q = |b: usize| sqrt_maxwellian(&grid.node(b));
        for a in [0, 40, 171, grid.len() - 1] {
            let va = grid.node(a);
            let mut k = 8.0 * PI * maxwellian(&va) * f.values[a];
            for i in 0..3 {
                for j in 0..3 {
                    let g = |b: usize| q(b) * (grad[j][b] + grid.node(b)[j] * f.values[b]);
                    k += 2.0 * va[i] * q(a) * conv(a, &g, i, j);
                    let p = |b: usize| {
                        let v = grid.node(b);
                        let d = if i == j { 1.0 } else { 0.0 };
                        q(b) * (d * f.values[b] - v[i] * v[j] * f.values[b] + v[j] * grad[i][b])
                    };
                    k -= 2.0 * q(a) * conv(a, &p, i, j);
                }
            }
            assert!((k - got[a]).abs() < 1e-12, "{a}: {k} vs {}", got[a]);
        }
    }

    #[test]
    fn k_is_symmetric() {
        let set = zero_set(17);
        let grid = set.grid;
        let f = GridField::from_fn(grid, |v| (-0.5 * dot(v, v)).exp() * (1.0 + 0.4 * v[0] * v[2]));
        let p = GridField::from_fn(grid, |v| (-0.4 * dot(v, v)).exp() * (v[1] + 0.7 * v[2] * v[2] - 0.2));
        let a = set.apply_k_field(&f).unwrap().inner(&p);
        let b = set.apply_k_field(&p).unwrap().inner(&f);
        assert!((a - b).abs() <= 1e-12 * f.inner(&f).sqrt() * p.inner(&p).sqrt());
    }

    #[test]
    fn g_terms_are_linear_and_reduce_for_sqrt_maxwellian() {
        let grid = VelocityGrid::new(4.0, 17).unwrap();
        let quad = QuadratureSpec::default();
        let g1 = GridField::from_fn(grid, |v| 0.01 * (v[0] - 0.5 * v[1] * v[2]) * (-0.1 * dot(v, v)).exp());
        let g2 = GridField::from_fn(grid, |v| 0.02 * (0.3 + v[2]).sin() * (-0.2 * dot(v, v)).exp());
        let sum = g1.zip_with(&g2, |a, b| 2.0 * a - b).unwrap();
        let build = |g: &GridField| {
            LandauCoefficientSet::build(&grid, &GSource::Grid { g: g.clone(), grad: None }, &quad).unwrap()
        };
        let (s0, s1, s2, s3) = (zero_set(17), build(&g1), build(&g2), build(&sum));
        for i in 0..grid.len() {
            let lin = |x: &LandauCoefficientSet| x.sigma_g[i].sub(&x.sigma[i]);
            let expect = lin(&s1).scale(2.0).sub(&lin(&s2));
            assert!(lin(&s3).sub(&expect).max_abs() < 1e-12);
            for k in 0..3 {
                assert!((s3.a_g[i][k] - 2.0 * s1.a_g[i][k] + s2.a_g[i][k]).abs() < 1e-12);
            }
            let jm = |x: &LandauCoefficientSet| x.j_multiplier[i] - s0.j_multiplier[i];
            assert!((jm(&s3) - 2.0 * jm(&s1) + jm(&s2)).abs() < 1e-12);
        }
        let bounds = s1.bounds();
        assert!(bounds.min_eig_sigma_g > 0.0);

        let q = GSource::Analytic {
            g: Arc::new(sqrt_maxwellian),
            grad: Arc::new(|v: &Vec3| {
                let s = sqrt_maxwellian(v);
                [-v[0] * s, -v[1] * s, -v[2] * s]
            }),
        };
        let sq = LandauCoefficientSet::build(&grid, &q, &quad).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            worst = worst.max(sq.sigma_g[i].sub(&sq.sigma[i].scale(2.0)).max_abs());
            // μ^{1/2}(v g + ∇g) = 0 for g = μ^{1/2}
            assert!(crate::sym::norm(&sq.a_g[i]) < 1e-14);
        }
        assert!(worst < 5e-3, "{worst:e}");
    }

    #[test]
    fn holder_modulus_scales_linearly() {
        let grid = VelocityGrid::new(3.0, 9).unwrap();
        let conv = GridConvolver::new(&grid);
        let pairs = [([0.1, 0.0, 0.0], [0.3, 0.0, 0.0]), ([0.0, 0.2, 0.0], [0.5, 0.1, 0.0])];
        let prof = |s: f64| move |x: &Vec3| GridField::from_fn(grid, |v| s * x[0].sin() * sqrt_maxwellian(v));
        let one = sigma_holder_modulus(&conv, prof(1.0), &pairs, 1.0, 1.0).unwrap();
        let two = sigma_holder_modulus(&conv, prof(2.0), &pairs, 1.0, 1.0).unwrap();
        assert!(one.modulus > 0.0);
        assert!((two.modulus - 2.0 * one.modulus).abs() < 1e-12 * one.modulus);
        let flat = sigma_holder_modulus(&conv, |_: &Vec3| GridField::from_fn(grid, sqrt_maxwellian), &pairs, 1.0, 0.0)
            .unwrap();
        assert_eq!(flat.modulus, 0.0);
    }
}
