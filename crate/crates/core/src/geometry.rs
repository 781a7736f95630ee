//! Boundary charts: the flattening map `ψ`, its Jacobian, specular
//! reflection, transformed coefficients and the whole-space extension.

use nalgebra::Matrix3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::SurfaceExpr;
use crate::sym::{dot, from_vector, norm, to_vector, SymMatrix3, Vec3};

/// Named boundary graphs accepted in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartPreset {
    Flat,
    /// `ρ = c1 y1² + c2 y2²`
    Paraboloid { c1: f64, c2: f64 },
    /// `ρ = amplitude · sin(k1 y1) cos(k2 y2)`
    Sinusoidal { amplitude: f64, k1: f64, k2: f64 },
    Expression { expr: String },
}

impl ChartPreset {
    pub fn name(&self) -> &'static str {
        match self {
            ChartPreset::Flat => "flat",
            ChartPreset::Paraboloid { .. } => "paraboloid",
            ChartPreset::Sinusoidal { .. } => "sinusoidal",
            ChartPreset::Expression { .. } => "expression",
        }
    }

    /// The three built-in presets with their default parameters.
    pub fn standard() -> Vec<ChartPreset> {
        vec![
            ChartPreset::Flat,
            ChartPreset::Paraboloid { c1: 0.5, c2: 0.3 },
            ChartPreset::Sinusoidal {
                amplitude: 0.1,
                k1: 2.0,
                k2: 3.0,
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Surface {
    Flat,
    Paraboloid { c1: f64, c2: f64 },
    Sinusoidal { amp: f64, k1: f64, k2: f64 },
    Expression(Box<SurfaceExpr>),
}

/// Boundary graph `x3 = ρ(x1, x2)` valid in the ball of radius `r0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryChart {
    surface: Surface,
    radius: f64,
    preset: ChartPreset,
}

/// Chart coordinates and chart velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub y: Vec3,
    pub w: Vec3,
}

/// `A = M⁻¹ â M⁻ᵀ`, `B = M⁻¹ b`, `X = M⁻¹ Γ(w, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedCoefficients {
    pub a: SymMatrix3,
    pub b: Vec3,
    pub x: Vec3,
}

impl BoundaryChart {
    pub fn new(preset: ChartPreset, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("chart radius must be positive, got {radius}")));
        }
        let surface = match &preset {
            ChartPreset::Flat => Surface::Flat,
            ChartPreset::Paraboloid { c1, c2 } => Surface::Paraboloid { c1: *c1, c2: *c2 },
            ChartPreset::Sinusoidal { amplitude, k1, k2 } => Surface::Sinusoidal {
                amp: *amplitude,
                k1: *k1,
                k2: *k2,
            },
            ChartPreset::Expression { expr } => {
                Surface::Expression(Box::new(SurfaceExpr::parse(expr)?))
            }
        };
        Ok(Self {
            surface,
            radius,
            preset,
        })
    }

    pub fn flat(radius: f64) -> Self {
        Self::new(ChartPreset::Flat, radius).expect("positive radius")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn preset(&self) -> &ChartPreset {
        &self.preset
    }

    pub fn rho(&self, y: [f64; 2]) -> f64 {
        match &self.surface {
            Surface::Flat => 0.0,
            Surface::Paraboloid { c1, c2 } => c1 * y[0] * y[0] + c2 * y[1] * y[1],
            Surface::Sinusoidal { amp, k1, k2 } => amp * (k1 * y[0]).sin() * (k2 * y[1]).cos(),
            Surface::Expression(e) => e.value(&y),
        }
    }

    /// `[ρ1, ρ2]`
    pub fn gradient(&self, y: [f64; 2]) -> [f64; 2] {
        match &self.surface {
            Surface::Flat => [0.0; 2],
            Surface::Paraboloid { c1, c2 } => [2.0 * c1 * y[0], 2.0 * c2 * y[1]],
            Surface::Sinusoidal { amp, k1, k2 } => {
                let (s1, c1) = (k1 * y[0]).sin_cos();
                let (s2, c2) = (k2 * y[1]).sin_cos();
                [amp * k1 * c1 * c2, -amp * k2 * s1 * s2]
            }
            Surface::Expression(e) => e.gradient(&y),
        }
    }

    /// `[ρ11, ρ12, ρ22]`
    pub fn hessian(&self, y: [f64; 2]) -> [f64; 3] {
        match &self.surface {
            Surface::Flat => [0.0; 3],
            Surface::Paraboloid { c1, c2 } => [2.0 * c1, 0.0, 2.0 * c2],
            Surface::Sinusoidal { amp, k1, k2 } => {
                let (s1, c1) = (k1 * y[0]).sin_cos();
                let (s2, c2) = (k2 * y[1]).sin_cos();
                [
                    -amp * k1 * k1 * s1 * c2,
                    -amp * k1 * k2 * c1 * s2,
                    -amp * k2 * k2 * s1 * c2,
                ]
            }
            Surface::Expression(e) => e.hessian(&y),
        }
    }

    /// `[ρ111, ρ112, ρ122, ρ222]`
    pub fn third(&self, y: [f64; 2]) -> [f64; 4] {
        match &self.surface {
            Surface::Flat | Surface::Paraboloid { .. } => [0.0; 4],
            Surface::Sinusoidal { amp, k1, k2 } => {
                let (s1, c1) = (k1 * y[0]).sin_cos();
                let (s2, c2) = (k2 * y[1]).sin_cos();
                [
                    -amp * k1.powi(3) * c1 * c2,
                    amp * k1 * k1 * k2 * s1 * s2,
                    -amp * k1 * k2 * k2 * c1 * c2,
                    amp * k2.powi(3) * s1 * s2,
                ]
            }
            Surface::Expression(e) => e.third(&y),
        }
    }

    fn check_range(&self, y: &Vec3) -> Result<()> {
        if !(norm(y) <= self.radius) {
            return Err(Error::Range(format!(
                "|y| = {} exceeds chart radius {}",
                norm(y),
                self.radius
            )));
        }
        Ok(())
    }

    /// `ψ⁻¹(y) = (y1, y2, ρ) + y3 (-ρ1, -ρ2, 1)`.
    pub fn psi_inverse(&self, y: &Vec3) -> Result<Vec3> {
        self.check_range(y)?;
        Ok(self.psi_inverse_unchecked(y))
    }

    fn psi_inverse_unchecked(&self, y: &Vec3) -> Vec3 {
        let p = [y[0], y[1]];
        let r = self.rho(p);
        let g = self.gradient(p);
        [y[0] - y[2] * g[0], y[1] - y[2] * g[1], r + y[2]]
    }

    fn jacobian_unchecked(&self, y: &Vec3) -> Matrix3<f64> {
        let p = [y[0], y[1]];
        let g = self.gradient(p);
        let h = self.hessian(p);
        let t = y[2];
        Matrix3::new(
            1.0 - t * h[0],
            -t * h[1],
            -g[0],
            -t * h[1],
            1.0 - t * h[2],
            -g[1],
            g[0],
            g[1],
            1.0,
        )
    }

    /// `M = ∂x/∂y` and `J = (det M)²`.
    pub fn jacobian_matrix(&self, y: &Vec3) -> Result<(Matrix3<f64>, f64)> {
        self.check_range(y)?;
        let m = self.jacobian_unchecked(y);
        let det = m.determinant();
        if !(det > 0.0) {
            return Err(Error::ChartSingularity(format!(
                "det(∂x/∂y) = {det} at y = {y:?}"
            )));
        }
        Ok((m, det * det))
    }

    fn inverse_jacobian(&self, y: &Vec3) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
        let (m, _) = self.jacobian_matrix(y)?;
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::ChartSingularity(format!("singular Jacobian at {y:?}")))?;
        Ok((m, inv))
    }

    /// Solve `ψ⁻¹(y) = x` by damped Newton and map `v` to `w = M⁻¹ v`.
    pub fn chart_forward(&self, x: &Vec3, v: &Vec3) -> Result<ChartPoint> {
        let mut y = [x[0], x[1], x[2] - self.rho([x[0], x[1]])];
        let residual = |y: &Vec3| {
            let p = self.psi_inverse_unchecked(y);
            [p[0] - x[0], p[1] - x[1], p[2] - x[2]]
        };
        let mut r = residual(&y);
        let scale = 1.0 + norm(x);
        let mut converged = false;
        for _ in 0..50 {
            if norm(&r) <= 1e-12 * scale {
                converged = true;
                break;
            }
            let m = self.jacobian_unchecked(&y);
            let step = m
                .lu()
                .solve(&to_vector(&r))
                .ok_or_else(|| Error::ChartSingularity(format!("singular Jacobian at {y:?}")))?;
            let mut t = 1.0;
            loop {
                let cand = [y[0] - t * step[0], y[1] - t * step[1], y[2] - t * step[2]];
                let rc = residual(&cand);
                if norm(&rc) < norm(&r) || t < 1e-6 {
                    y = cand;
                    r = rc;
                    break;
                }
                t *= 0.5;
            }
        }
        if !converged && norm(&r) > 1e-12 * scale {
            return Err(Error::ChartSingularity(format!(
                "Newton did not converge for x = {x:?} (residual {})",
                norm(&r)
            )));
        }
        let (_, inv) = self.inverse_jacobian(&y)?;
        Ok(ChartPoint {
            y,
            w: from_vector(&(inv * to_vector(v))),
        })
    }

    /// `Γ_i(u, w) = Σ_jk ∂²x_i/∂y_j∂y_k u_j w_k`.
    pub fn second_derivative_form(&self, y: &Vec3, u: &Vec3, w: &Vec3) -> Vec3 {
        let p = [y[0], y[1]];
        let h = self.hessian(p);
        let t3 = self.third(p);
        // ∂_{ab} ρ_1 and ∂_{ab} ρ_2 for a, b in {1, 2}, stored as [11, 12, 22]
        let r1 = [t3[0], t3[1], t3[2]];
        let r2 = [t3[1], t3[2], t3[3]];
        let tan = |q: &[f64; 3]| q[0] * u[0] * w[0] + q[1] * (u[0] * w[1] + u[1] * w[0]) + q[2] * u[1] * w[1];
        let mixed1 = h[0] * (u[0] * w[2] + u[2] * w[0]) + h[1] * (u[1] * w[2] + u[2] * w[1]);
        let mixed2 = h[1] * (u[0] * w[2] + u[2] * w[0]) + h[2] * (u[1] * w[2] + u[2] * w[1]);
        [
            -y[2] * tan(&r1) - mixed1,
            -y[2] * tan(&r2) - mixed2,
            tan(&h),
        ]
    }

    /// Transform diffusion `â`, drift `b` and the free-transport term at a chart point.
    pub fn transform_coefficients(
        &self,
        a_hat: &SymMatrix3,
        b: &Vec3,
        point: &ChartPoint,
    ) -> Result<TransformedCoefficients> {
        let (_, inv) = self.inverse_jacobian(&point.y)?;
        let gamma = self.second_derivative_form(&point.y, &point.w, &point.w);
        Ok(TransformedCoefficients {
            a: a_hat.congruence(&inv),
            b: from_vector(&(inv * to_vector(b))),
            x: from_vector(&(inv * to_vector(&gamma))),
        })
    }

    /// `∇_w X = 2 M⁻¹ Γ(w, ·)`, column `k` is `∂X/∂w_k`.
    pub fn transport_gradient(&self, point: &ChartPoint) -> Result<Matrix3<f64>> {
        let (_, inv) = self.inverse_jacobian(&point.y)?;
        let mut g = Matrix3::zeros();
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let col = self.second_derivative_form(&point.y, &point.w, &e);
            g.set_column(k, &(inv * to_vector(&col) * 2.0));
        }
        Ok(g)
    }

    /// Outward unit normal `(-ρ1, -ρ2, 1)/√(1 + |∇ρ|²)` at the boundary point over `y12`.
    pub fn unit_normal(&self, y12: [f64; 2]) -> Vec3 {
        let g = self.gradient(y12);
        let s = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
        [-g[0] / s, -g[1] / s, 1.0 / s]
    }

    /// `|V(y, w) - V(y, Rw)|` with `V = |M w|` at `y3 = 0`.
    pub fn check_speed_invariance(&self, y12: [f64; 2], w: &Vec3) -> Result<f64> {
        let (m, _) = self.jacobian_matrix(&[y12[0], y12[1], 0.0])?;
        let a = (m * to_vector(w)).norm();
        let b = (m * to_vector(&[w[0], w[1], -w[2]])).norm();
        Ok((a - b).abs())
    }

    /// `|M Rw - R_x M w|_∞` at the boundary point over `y12`.
    pub fn specular_residual(&self, y12: [f64; 2], w: &Vec3) -> Result<f64> {
        let (m, _) = self.jacobian_matrix(&[y12[0], y12[1], 0.0])?;
        let v = from_vector(&(m * to_vector(w)));
        let rv = specular_reflect(&v, &self.unit_normal(y12))?;
        let mrw = from_vector(&(m * to_vector(&[w[0], w[1], -w[2]])));
        Ok((0..3).fold(0.0_f64, |acc, i| acc.max((rv[i] - mrw[i]).abs())))
    }

    /// `max_{i=1,2} |A^{i3}|` for `â = I` at `y3 = 0`.
    pub fn normal_coupling_residual(&self, y12: [f64; 2]) -> Result<f64> {
        let a = self.laplacian_coefficient(&[y12[0], y12[1], 0.0])?;
        Ok(a.get(0, 2).abs().max(a.get(1, 2).abs()))
    }

    /// Entrywise gap between `A⁻¹` (for `â = I`, `y3 = 0`) and its closed form.
    pub fn inverse_metric_residual(&self, y12: [f64; 2]) -> Result<f64> {
        let a = self.laplacian_coefficient(&[y12[0], y12[1], 0.0])?;
        let inv = a
            .to_matrix()
            .try_inverse()
            .ok_or_else(|| Error::ChartSingularity("singular transformed metric".into()))?;
        let g = self.gradient(y12);
        let closed = Matrix3::new(
            1.0 + g[0] * g[0],
            g[0] * g[1],
            0.0,
            g[0] * g[1],
            1.0 + g[1] * g[1],
            0.0,
            0.0,
            0.0,
            1.0 + g[0] * g[0] + g[1] * g[1],
        );
        Ok((inv - closed).amax())
    }

    /// Transformed identity diffusion `M⁻¹ M⁻ᵀ`.
    pub fn laplacian_coefficient(&self, y: &Vec3) -> Result<SymMatrix3> {
        let (_, inv) = self.inverse_jacobian(y)?;
        Ok(SymMatrix3::from_matrix(&(inv * inv.transpose())))
    }

    /// Lower ellipticity bound `min(δ/s_max², δ s_min²)` for `A` from `â ∈ Sym(δ)`.
    pub fn ellipticity_bound(&self, y: &Vec3, delta: f64) -> Result<f64> {
        let (m, _) = self.jacobian_matrix(y)?;
        let sv = m.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        Ok((delta / (smax * smax)).min(delta * smin * smin))
    }
}

/// `R_n v = v - 2 (n·v) n`.
pub fn specular_reflect(v: &Vec3, n: &Vec3) -> Result<Vec3> {
    let nn = norm(n);
    if (nn - 1.0).abs() > 1e-12 {
        return Err(Error::Normalization(nn));
    }
    let c = 2.0 * dot(n, v);
    Ok([v[0] - c * n[0], v[1] - c * n[1], v[2] - c * n[2]])
}

/// Smooth radial cutoff: 1 on `|y| ≤ 3r0/4`, 0 on `|y| ≥ 7r0/8`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    pub r0: f64,
}

impl RadialCutoff {
    pub fn value(&self, y: &Vec3) -> f64 {
        let r = norm(y);
        let inner = 0.75 * self.r0;
        let outer = 0.875 * self.r0;
        if r <= inner {
            return 1.0;
        }
        if r >= outer {
            return 0.0;
        }
        let s = (r - inner) / (outer - inner);
        let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
        let a = bump(1.0 - s);
        a / (a + bump(s))
    }
}

/// `𝒜 = κ A + δ (1 - κ) I`.
pub fn blend_cutoff(a: &SymMatrix3, delta: f64, kappa: f64) -> Result<SymMatrix3> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Config(format!("cutoff value {kappa} outside [0, 1]")));
    }
    Ok(a.scale(kappa).add(&SymMatrix3::scaled_identity(delta * (1.0 - kappa))))
}

/// Which reflection rule to apply when extending across `y3 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionKind {
    MatrixA,
    VectorB,
    VectorX,
}

/// Coefficient value returned by a half-space evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Matrix(SymMatrix3),
    Vector(Vec3),
}

fn reflect(y: &Vec3) -> Vec3 {
    [y[0], y[1], -y[2]]
}

/// Source value for `y3 ≤ 0`, reflected value `R f(Ry, Rw) [R]` for `y3 > 0`.
pub fn extend_whole_space(
    kind: ExtensionKind,
    field: impl Fn(&Vec3, &Vec3) -> Coefficient,
    y: &Vec3,
    w: &Vec3,
) -> Result<Coefficient> {
    if y[2] <= 0.0 {
        return check_kind(kind, field(y, w));
    }
    match check_kind(kind, field(&reflect(y), &reflect(w)))? {
        Coefficient::Matrix(a) => Ok(Coefficient::Matrix(a.reflect())),
        Coefficient::Vector(b) => Ok(Coefficient::Vector(reflect(&b))),
    }
}

fn check_kind(kind: ExtensionKind, c: Coefficient) -> Result<Coefficient> {
    match (kind, &c) {
        (ExtensionKind::MatrixA, Coefficient::Matrix(_))
        | (ExtensionKind::VectorB | ExtensionKind::VectorX, Coefficient::Vector(_)) => Ok(c),
        _ => Err(Error::Structure(format!(
            "extension kind {kind:?} does not match the field's value type"
        ))),
    }
}

pub fn extend_matrix(field: impl Fn(&Vec3, &Vec3) -> SymMatrix3, y: &Vec3, w: &Vec3) -> SymMatrix3 {
    if y[2] <= 0.0 {
        field(y, w)
    } else {
        field(&reflect(y), &reflect(w)).reflect()
    }
}

pub fn extend_vector(field: impl Fn(&Vec3, &Vec3) -> Vec3, y: &Vec3, w: &Vec3) -> Vec3 {
    if y[2] <= 0.0 {
        field(y, w)
    } else {
        reflect(&field(&reflect(y), &reflect(w)))
    }
}

impl BoundaryChart {
    /// Cutoff-blended flattened identity diffusion `𝒜` on `y3 ≤ 0`.
    pub fn blended_laplacian(&self, delta: f64, y: &Vec3) -> Result<SymMatrix3> {
        let kappa = RadialCutoff { r0: self.radius }.value(y);
        if kappa == 0.0 {
            return Ok(SymMatrix3::scaled_identity(delta));
        }
        blend_cutoff(&self.laplacian_coefficient(y)?, delta, kappa)
    }

    /// Whole-space extension `𝔸` of [`Self::blended_laplacian`].
    pub fn extended_laplacian(&self, delta: f64, y: &Vec3) -> Result<SymMatrix3> {
        if y[2] <= 0.0 {
            self.blended_laplacian(delta, y)
        } else {
            Ok(self.blended_laplacian(delta, &reflect(y))?.reflect())
        }
    }
}

/// Maximum residuals of the boundary identities over random boundary points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryAudit {
    pub chart: String,
    pub samples: usize,
    pub specular: f64,
    pub normal_coupling: f64,
    pub inverse_metric: f64,
    pub speed_invariance: f64,
    pub roundtrip: f64,
}

/// Uniform sample in the disk `|y12| ≤ r`.
pub fn sample_disk<R: Rng + ?Sized>(rng: &mut R, r: f64) -> [f64; 2] {
    loop {
        let p = [rng.gen_range(-r..r), rng.gen_range(-r..r)];
        if p[0] * p[0] + p[1] * p[1] <= r * r {
            return p;
        }
    }
}

pub fn sample_velocity<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vec3 {
    [
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    ]
}

/// Evaluate every boundary identity at `samples` random points.
pub fn audit_chart<R: Rng + ?Sized>(chart: &BoundaryChart, samples: usize, rng: &mut R) -> Result<GeometryAudit> {
    let mut out = GeometryAudit {
        chart: chart.preset().name().to_string(),
        samples,
        specular: 0.0,
        normal_coupling: 0.0,
        inverse_metric: 0.0,
        speed_invariance: 0.0,
        roundtrip: 0.0,
    };
    let r = chart.radius();
    for _ in 0..samples {
        let y12 = sample_disk(rng, r);
        let w = sample_velocity(rng, 3.0);
        out.specular = out.specular.max(chart.specular_residual(y12, &w)?);
        out.normal_coupling = out.normal_coupling.max(chart.normal_coupling_residual(y12)?);
        out.inverse_metric = out.inverse_metric.max(chart.inverse_metric_residual(y12)?);
        out.speed_invariance = out.speed_invariance.max(chart.check_speed_invariance(y12, &w)?);
        let p = sample_disk(rng, 0.5 * r);
        let y = [p[0], p[1], -rng.gen_range(0.0..0.4 * r)];
        let x = chart.psi_inverse(&y)?;
        let v = sample_velocity(rng, 3.0);
        let cp = chart.chart_forward(&x, &v)?;
        let back = chart.psi_inverse_unchecked(&cp.y);
        let err = (0..3).fold(0.0_f64, |m, i| m.max((back[i] - x[i]).abs()));
        out.roundtrip = out.roundtrip.max(err);
    }
    Ok(out)
}

/// Fitted constants in `|X| ≤ C |w|²` and `|∇_w X| ≤ C' |w|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportBoundFit {
    pub c_value: f64,
    pub c_gradient: f64,
    pub samples: usize,
}

pub fn fit_transport_bound<R: Rng + ?Sized>(
    chart: &BoundaryChart,
    samples: usize,
    rng: &mut R,
) -> Result<TransportBoundFit> {
    let mut fit = TransportBoundFit {
        c_value: 0.0,
        c_gradient: 0.0,
        samples,
    };
    for _ in 0..samples {
        let p = sample_disk(rng, 0.6 * chart.radius());
        let y = [p[0], p[1], -rng.gen_range(0.0..0.3 * chart.radius())];
        let dir = sample_velocity(rng, 1.0);
        let mag = 10f64.powf(rng.gen_range(-1.0..1.0));
        let nd = norm(&dir).max(1e-12);
        let w = [dir[0] / nd * mag, dir[1] / nd * mag, dir[2] / nd * mag];
        let pt = ChartPoint { y, w };
        let tc = chart.transform_coefficients(&SymMatrix3::identity(), &[0.0; 3], &pt)?;
        fit.c_value = fit.c_value.max(norm(&tc.x) / (mag * mag));
        fit.c_gradient = fit
            .c_gradient
            .max(chart.transport_gradient(&pt)?.norm() / mag);
    }
    Ok(fit)
}
