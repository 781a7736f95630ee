//! Weighted norms and regularity diagnostics: `L_{p,θ}`, the σ-weighted
//! norm, `S_p` components, anisotropic Hölder estimates and kinetic oscillation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, GridField, VelocityGrid};
use crate::landau::central_gradient;
use crate::slab::PhaseField;
use crate::sym::{bracket, dot, norm, sub, SymMatrix3, Vec3};

/// Exponent `p ∈ [1, ∞]` and velocity weight `⟨v⟩^θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub p: f64,
    pub theta: f64,
}

impl WeightSpec {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(p >= 1.0) || !(theta >= 0.0) || theta.is_infinite() {
            return Err(Error::Config(format!("need p ≥ 1 and finite θ ≥ 0, got p = {p}, θ = {theta}")));
        }
        Ok(Self { p, theta })
    }

    pub fn l2(theta: f64) -> Self {
        Self { p: 2.0, theta }
    }

    pub fn weight(&self, v: &Vec3) -> f64 {
        bracket(v).powf(self.theta)
    }
}

/// `⟨v⟩^θ` at every node of `grid`.
pub fn node_weights(grid: &VelocityGrid, theta: f64) -> Vec<f64> {
    (0..grid.len()).map(|i| bracket(&grid.node(i)).powf(theta)).collect()
}

fn lp_sum(values: &[f64], weights: impl Fn(usize) -> f64, p: f64, volume: f64) -> f64 {
    if p.is_infinite() {
        return values
            .iter()
            .enumerate()
            .fold(0.0_f64, |m, (i, x)| m.max(x.abs() * weights(i)));
    }
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, x)| x.abs().powf(p) * weights(i))
        .sum();
    (s * volume).powf(1.0 / p)
}

/// `(Σ |f|^p ⟨v⟩^θ dx h³)^{1/p}`; for `p = ∞` the weighted sup `max |f| ⟨v⟩^θ`.
pub fn weighted_norm(f: &PhaseField, spec: &WeightSpec) -> f64 {
    let w = node_weights(&f.grid, spec.theta);
    let n = f.grid.len();
    lp_sum(&f.values, |i| w[i % n], spec.p, f.cell_volume())
}

/// [`weighted_norm`] for a single velocity profile, with measure `h³`.
pub fn weighted_velocity_norm(f: &GridField, spec: &WeightSpec) -> f64 {
    let w = node_weights(&f.grid, spec.theta);
    lp_sum(&f.values, |i| w[i], spec.p, f.grid.spacing().powi(3))
}

/// `‖u‖²_{σ,θ} = Σ (σ^{ij} ∂_i u ∂_j u + σ^{ij} v_i v_j u²) ⟨v⟩^θ h³`, without the square root.
pub fn sigma_weighted_energy(u: &[f64], grad: &[Vec<f64>; 3], grid: &VelocityGrid, sigma: &[SymMatrix3], weights: &[f64]) -> f64 {
    let h3 = grid.spacing().powi(3);
    (0..grid.len())
        .map(|i| {
            let v = grid.node(i);
            let g = [grad[0][i], grad[1][i], grad[2][i]];
            (sigma[i].quad(&g) + sigma[i].quad(&v) * u[i] * u[i]) * weights[i]
        })
        .sum::<f64>()
        * h3
}

/// Check that every `σ` node is positive semidefinite up to roundoff.
pub fn check_psd(sigma: &[SymMatrix3]) -> Result<()> {
    for (i, s) in sigma.iter().enumerate() {
        let ev = s.eigenvalues();
        if !s.is_finite() || ev[0] < -1e-12 * (1.0 + ev[2].abs()) {
            return Err(Error::Data(format!("σ is not positive semidefinite at node {i}: eigenvalues {ev:?}")));
        }
    }
    Ok(())
}

/// `‖u‖_{σ,θ}` with `∇u` from central differences unless supplied.
pub fn sigma_weighted_norm(u: &GridField, grad: Option<&[GridField; 3]>, sigma: &[SymMatrix3], theta: f64) -> Result<f64> {
    if sigma.len() != u.grid.len() {
        return Err(Error::Structure(format!("{} σ nodes for {} grid nodes", sigma.len(), u.grid.len())));
    }
    check_psd(sigma)?;
    let g = match grad {
        Some(g) => {
            for x in g {
                same_grid(&u.grid, &x.grid)?;
            }
            g.clone()
        }
        None => central_gradient(u),
    };
    let gv = g.map(|x| x.values);
    let w = node_weights(&u.grid, theta);
    Ok(sigma_weighted_energy(&u.values, &gv, &u.grid, sigma, &w).max(0.0).sqrt())
}

/// Ratio `‖u‖_{σ,θ} / ‖|u| + |∇u|‖_{L_{2,θ-1}}`, bounded above uniformly in `u`.
pub fn sigma_norm_bound_ratio(u: &GridField, sigma: &[SymMatrix3], theta: f64) -> Result<f64> {
    let s = sigma_weighted_norm(u, None, sigma, theta)?;
    let g = central_gradient(u);
    let combined = GridField {
        grid: u.grid,
        values: (0..u.grid.len())
            .map(|i| u.values[i].abs() + norm(&[g[0].values[i], g[1].values[i], g[2].values[i]]))
            .collect(),
        exterior: u.exterior,
    };
    let r = weighted_velocity_norm(&combined, &WeightSpec::l2(theta - 1.0));
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(s / r)
}

/// Sampled lower bound for the anisotropic Hölder seminorm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub estimate: f64,
    pub alpha: f64,
    pub pairs_used: usize,
    pub skipped: usize,
    pub seed: Option<u64>,
    /// Always a lower bound for the seminorm over the continuum.
    pub lower_bound: bool,
}

pub type PhasePoint = (Vec3, Vec3);

/// `max |f(x1,v1) - f(x2,v2)| / (|x1-x2|^{1/3} + |v1-v2|)^α` over `pairs`.
pub fn anisotropic_holder_seminorm(
    f: impl Fn(&Vec3, &Vec3) -> f64,
    pairs: &[(PhasePoint, PhasePoint)],
    alpha: f64,
) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let mut report = HolderReport {
        estimate: 0.0,
        alpha,
        pairs_used: 0,
        skipped: 0,
        seed: None,
        lower_bound: true,
    };
    for ((x1, v1), (x2, v2)) in pairs {
        let d = norm(&sub(x1, x2)).cbrt() + norm(&sub(v1, v2));
        if d == 0.0 {
            report.skipped += 1;
            continue;
        }
        let ratio = (f(x1, v1) - f(x2, v2)).abs() / d.powf(alpha);
        report.estimate = report.estimate.max(ratio);
        report.pairs_used += 1;
    }
    Ok(report)
}

/// Uniform random pairs in the box `[lo, hi]` for `x` and `[-vmax, vmax]³` for `v`.
pub fn sample_phase_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    x_lo: &Vec3,
    x_hi: &Vec3,
    vmax: f64,
) -> Vec<(PhasePoint, PhasePoint)> {
    let point = |rng: &mut R| -> PhasePoint {
        let x = std::array::from_fn(|k| if x_hi[k] > x_lo[k] { rng.gen_range(x_lo[k]..x_hi[k]) } else { x_lo[k] });
        let v = std::array::from_fn(|_| rng.gen_range(-vmax..vmax));
        (x, v)
    };
    (0..count).map(|_| (point(rng), point(rng))).collect()
}

/// `Q_r(z0) = {t ∈ (t0 - r², t0], |v - v0| < r, |x - x0 - (t - t0) v0|^{1/3} < r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticCylinder {
    pub t0: f64,
    pub x0: Vec3,
    pub v0: Vec3,
    pub r: f64,
}

impl KineticCylinder {
    pub fn new(t0: f64, x0: Vec3, v0: Vec3, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("cylinder radius must be positive, got {r}")));
        }
        Ok(Self { t0, x0, v0, r })
    }

    pub fn contains(&self, t: f64, x: &Vec3, v: &Vec3) -> bool {
        let r = self.r;
        let dt = t - self.t0;
        let shifted = [
            x[0] - self.x0[0] - dt * self.v0[0],
            x[1] - self.x0[1] - dt * self.v0[1],
            x[2] - self.x0[2] - dt * self.v0[2],
        ];
        dt <= 0.0 && dt > -r * r && norm(&sub(v, &self.v0)) < r && norm(&shifted).cbrt() < r
    }
}

fn sample_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Vec3 {
    loop {
        let p: Vec3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if dot(&p, &p) < 1.0 {
            return crate::sym::scale(&p, radius);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub estimate: f64,
    pub radius: f64,
    pub samples: usize,
}

/// Monte-Carlo mean of `|a(t,x1,v1) - a(t,x2,v2)|` over pairs drawn uniformly
/// from the slices `D_r(z0, t)` of the cylinder, with `t` uniform in `(t0 - r², t0]`.
pub fn kinetic_osc<R: Rng + ?Sized>(
    a: impl Fn(f64, &Vec3, &Vec3) -> f64,
    cyl: &KineticCylinder,
    samples: usize,
    rng: &mut R,
) -> Result<OscillationReport> {
    if !(cyl.r > 0.0 && cyl.r.is_finite()) {
        return Err(Error::Config(format!("degenerate kinetic cylinder with r = {}", cyl.r)));
    }
    if samples == 0 {
        return Err(Error::Config("kinetic_osc needs at least one sample".into()));
    }
    let r = cyl.r;
    let mut sum = 0.0;
    for _ in 0..samples {
        let t = cyl.t0 - r * r * rng.gen::<f64>();
        let dt = t - cyl.t0;
        let center = [
            cyl.x0[0] + dt * cyl.v0[0],
            cyl.x0[1] + dt * cyl.v0[1],
            cyl.x0[2] + dt * cyl.v0[2],
        ];
        let point = |rng: &mut R| {
            let x = crate::sym::add(&center, &sample_ball(rng, r * r * r));
            let v = crate::sym::add(&cyl.v0, &sample_ball(rng, r));
            (x, v)
        };
        let (x1, v1) = point(rng);
        let (x2, v2) = point(rng);
        sum += (a(t, &x1, &v1) - a(t, &x2, &v2)).abs();
    }
    Ok(OscillationReport {
        estimate: sum / samples as f64,
        radius: r,
        samples,
    })
}

/// `L_{2,θ}` norms of `f`, `∇_v f`, `D²_v f` and `Y f` over interior time levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpNormReport {
    pub f: f64,
    pub grad_v: f64,
    pub hess_v: f64,
    pub transport: f64,
}

/// Components of the `S_{2,θ}` norm from equally spaced frames on a slab.
///
/// `Y f = ∂_t f + v3 ∂_{x3} f` uses centered differences in `t` and `x3`
/// (one-sided at the walls); velocity derivatives are centered with zero extension.
pub fn sp_norm_components(frames: &[PhaseField], theta: f64) -> Result<SpNormReport> {
    if frames.len() < 3 {
        return Err(Error::Precondition(format!("S_p components need ≥ 3 time levels, got {}", frames.len())));
    }
    for f in &frames[1..] {
        frames[0].same_shape(f)?;
    }
    let dt = frames[1].t - frames[0].t;
    if !(dt > 0.0) || frames.windows(2).any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.abs().max(1.0)) {
        return Err(Error::Precondition("frames must be equally spaced in time".into()));
    }
    let slab = frames[0].slab;
    let grid = frames[0].grid;
    let n = grid.len();
    let nc = slab.cells();
    let dx = slab.dx();
    let h = grid.spacing();
    let w = node_weights(&grid, theta);
    let vol = frames[0].cell_volume() * dt;
    let mut acc = [0.0; 4];
    for k in 1..frames.len() - 1 {
        let f = &frames[k];
        for c in 0..nc {
            let cell = f.cell_field(c);
            let at = |m: [i64; 3]| cell.at(m);
            for i in 0..n {
                let m = grid.multi_index(i).map(|x| x as i64);
                let u = cell.values[i];
                let mut g2 = 0.0;
                let mut h2 = 0.0;
                for a in 0..3 {
                    let mut p = m;
                    let mut q = m;
                    p[a] += 1;
                    q[a] -= 1;
                    let d = (at(p) - at(q)) / (2.0 * h);
                    g2 += d * d;
                    for b in 0..3 {
                        let d2 = if a == b {
                            (at(p) - 2.0 * u + at(q)) / (h * h)
                        } else {
                            let shift = |s: [i64; 3], sb: i64| {
                                let mut r = s;
                                r[b] += sb;
                                at(r)
                            };
                            (shift(p, 1) - shift(p, -1) - shift(q, 1) + shift(q, -1)) / (4.0 * h * h)
                        };
                        h2 += d2 * d2;
                    }
                }
                let idx = c * n + i;
                let ft = (frames[k + 1].values[idx] - frames[k - 1].values[idx]) / (2.0 * dt);
                let fx = if c == 0 {
                    (f.values[n + i] - f.values[i]) / dx
                } else if c == nc - 1 {
                    (f.values[idx] - f.values[idx - n]) / dx
                } else {
                    (f.values[idx + n] - f.values[idx - n]) / (2.0 * dx)
                };
                let yf = ft + grid.node(i)[2] * fx;
                acc[0] += u * u * w[i];
                acc[1] += g2 * w[i];
                acc[2] += h2 * w[i];
                acc[3] += yf * yf * w[i];
            }
        }
    }
    let r = acc.map(|s| (s * vol).sqrt());
    Ok(SpNormReport {
        f: r[0],
        grad_v: r[1],
        hess_v: r[2],
        transport: r[3],
    })
}
