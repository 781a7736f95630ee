//! Mirror extension of half-space fields across `{y3 = 0}` and the
//! reflection antisymmetry of chart-transformed Landau convolutions.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{sample_disk, sample_velocity, BoundaryChart};
use crate::landau::PointQuadrature;
use crate::sym::{reflect3, to_vector, SymMatrix3, Vec3};

/// Values that can be mirrored across `{y3 = 0}`.
pub trait MirrorValue: Clone {
    /// `R x` for vectors, `R x R` for matrices, identity for scalars.
    fn mirror(&self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn gap(&self, other: &Self) -> f64;
    /// `2 a - b`, used for one-sided Richardson limits.
    fn extrapolate(&self, other: &Self) -> Self;
}

impl MirrorValue for f64 {
    fn mirror(&self) -> Self {
        *self
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn gap(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn extrapolate(&self, other: &Self) -> Self {
        2.0 * self - other
    }
}

impl MirrorValue for Vec3 {
    fn mirror(&self) -> Self {
        reflect3(self)
    }
    fn scale(&self, s: f64) -> Self {
        crate::sym::scale(self, s)
    }
    fn gap(&self, other: &Self) -> f64 {
        (0..3).fold(0.0_f64, |m, i| m.max((self[i] - other[i]).abs()))
    }
    fn extrapolate(&self, other: &Self) -> Self {
        std::array::from_fn(|i| 2.0 * self[i] - other[i])
    }
}

impl MirrorValue for SymMatrix3 {
    fn mirror(&self) -> Self {
        self.reflect()
    }
    fn scale(&self, s: f64) -> Self {
        SymMatrix3::scale(self, s)
    }
    fn gap(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
    fn extrapolate(&self, other: &Self) -> Self {
        self.scale(2.0).sub(other)
    }
}

type Evaluator<T> = Arc<dyn Fn(&Vec3, &Vec3) -> T + Send + Sync>;

/// `û(y, w)` on `y3 ≤ 0` with an optional Jacobian weight, giving `ũ = û J`.
#[derive(Clone)]
pub struct HalfSpaceField<T> {
    eval: Evaluator<T>,
    jacobian: Option<Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>>,
}

impl<T: MirrorValue> HalfSpaceField<T> {
    pub fn new(eval: impl Fn(&Vec3, &Vec3) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, jacobian: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Weight by the chart's `J(y)`.
    pub fn with_chart_jacobian(self, chart: BoundaryChart) -> Self {
        self.with_jacobian(move |y| chart.jacobian_matrix(y).map(|(_, j)| j).unwrap_or(f64::NAN))
    }

    /// `ũ(y, w) = û(y, w) J(y)`.
    pub fn weighted(&self, y: &Vec3, w: &Vec3) -> T {
        let u = (self.eval)(y, w);
        match &self.jacobian {
            Some(j) => u.scale(j(y)),
            None => u,
        }
    }
}

/// `ū(y, w)`: the source on `y3 ≤ 0` and the mirror image `ũ(Ry, Rw)` above.
#[derive(Clone)]
pub struct ExtendedField<T> {
    source: HalfSpaceField<T>,
}

impl<T: MirrorValue> ExtendedField<T> {
    pub fn eval(&self, y: &Vec3, w: &Vec3) -> T {
        if y[2] <= 0.0 {
            self.source.weighted(y, w)
        } else {
            self.source.weighted(&reflect3(y), &reflect3(w)).mirror()
        }
    }
}

pub fn mirror_extend<T: MirrorValue>(f: HalfSpaceField<T>) -> ExtendedField<T> {
    ExtendedField { source: f }
}

/// Largest jump of an extended field across `{y3 = 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub samples: usize,
    pub max_jump: f64,
    pub worst_point: Option<([f64; 2], Vec3)>,
}

/// Offset used for one-sided evaluations next to the interface.
pub const PROBE_OFFSET: f64 = 1e-6;

/// One-sided limits at `y3 = 0±` from evaluations at `±s` and `±2s`,
/// extrapolated as `2 u(±s) - u(±2s)` so the `O(s)` slope term cancels.
pub fn interface_jump<T: MirrorValue>(f: &ExtendedField<T>, y12: [f64; 2], w: &Vec3) -> f64 {
    let at = |t: f64| f.eval(&[y12[0], y12[1], t], w);
    let s = PROBE_OFFSET;
    let below = at(-s).extrapolate(&at(-2.0 * s));
    let above = at(s).extrapolate(&at(2.0 * s));
    below.gap(&above)
}

/// Sample `(y1, y2)` in the disk of radius `radius` and `w` with Gaussian
/// entries of scale `speed`, and report the largest interface jump.
pub fn continuity_probe<T: MirrorValue, R: Rng + ?Sized>(
    f: &ExtendedField<T>,
    samples: usize,
    radius: f64,
    speed: f64,
    rng: &mut R,
) -> JumpReport {
    let mut report = JumpReport {
        samples,
        max_jump: 0.0,
        worst_point: None,
    };
    for _ in 0..samples {
        let y12 = sample_disk(rng, radius);
        let w = sample_velocity(rng, speed);
        let jump = interface_jump(f, y12, &w);
        if jump > report.max_jump || jump.is_nan() {
            report.max_jump = jump;
            report.worst_point = Some((y12, w));
        }
    }
    report
}

/// Box half-width and the two lattice resolutions of the antisymmetry check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntisymmetryQuadrature {
    pub half_width: f64,
    pub coarse: usize,
    pub fine: usize,
}

impl Default for AntisymmetryQuadrature {
    fn default() -> Self {
        Self {
            half_width: 5.0,
            coarse: 32,
            fine: 48,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntisymmetryReport {
    pub check: String,
    pub chart: String,
    pub point: [f64; 2],
    pub w: Vec3,
    /// `max_{i=1,2} |𝔘^{i3}(w) + 𝔘^{i3}(Rw)|` at the fine resolution.
    pub residual: f64,
    pub coarse_residual: f64,
    /// Richardson estimate of the fine-resolution quadrature error in that sum.
    pub quad_error_estimate: f64,
    pub tail: f64,
    pub warning: Option<String>,
}

/// Tail values above this trigger a warning.
pub const TAIL_WARNING: f64 = 1e-7;

/// `𝔘(w) = M⁻¹ (Φ ∗ u)(M w) M⁻ᵀ` at the boundary point over `y12`, where `u`
/// is a function of the physical velocity.
pub fn transformed_convolution(
    chart: &BoundaryChart,
    u: &(dyn Fn(&Vec3) -> f64 + Sync),
    y12: [f64; 2],
    w: &Vec3,
    quad: &PointQuadrature,
) -> Result<(SymMatrix3, f64)> {
    let (m, _) = chart.jacobian_matrix(&[y12[0], y12[1], 0.0])?;
    let inv = m.try_inverse().ok_or_else(|| {
        crate::error::Error::ChartSingularity(format!("singular Jacobian over {y12:?}"))
    })?;
    let v = crate::sym::from_vector(&(m * to_vector(w)));
    let c = quad.phi_convolve(&v, u);
    Ok((c.value.congruence(&inv), c.tail))
}

/// Check `𝔘^{i3}(w) = -𝔘^{i3}(Rw)` for `i = 1, 2` at two resolutions.
///
/// The error estimate assumes the residual converges at second order or
/// faster: `(|ΔU(w)| + |ΔU(Rw)|) / (r² - 1)` with `r = fine / coarse`.
pub fn convolution_antisymmetry_check(
    chart: &BoundaryChart,
    u: &(dyn Fn(&Vec3) -> f64 + Sync),
    y12: [f64; 2],
    w: &Vec3,
    quad: &AntisymmetryQuadrature,
) -> Result<AntisymmetryReport> {
    let rw = reflect3(w);
    let eval = |cells: usize| -> Result<(SymMatrix3, SymMatrix3, f64)> {
        let q = PointQuadrature {
            half_width: quad.half_width,
            cells,
        };
        let (a, ta) = transformed_convolution(chart, u, y12, w, &q)?;
        let (b, tb) = transformed_convolution(chart, u, y12, &rw, &q)?;
        Ok((a, b, ta.max(tb)))
    };
    let residual = |a: &SymMatrix3, b: &SymMatrix3| {
        (a.get(0, 2) + b.get(0, 2)).abs().max((a.get(1, 2) + b.get(1, 2)).abs())
    };
    let (ca, cb, _) = eval(quad.coarse)?;
    let (fa, fb, tail) = eval(quad.fine)?;
    let r = quad.fine as f64 / quad.coarse as f64;
    let delta = |x: &SymMatrix3, y: &SymMatrix3| {
        (x.get(0, 2) - y.get(0, 2)).abs().max((x.get(1, 2) - y.get(1, 2)).abs())
    };
    let estimate = (delta(&fa, &ca) + delta(&fb, &cb)) / (r * r - 1.0);
    let warning = (tail > TAIL_WARNING).then(|| format!("integrand reaches {tail:.3e} on the quadrature box faces"));
    Ok(AntisymmetryReport {
        check: "convolution_antisymmetry".into(),
        chart: chart.preset().name().into(),
        point: y12,
        w: *w,
        residual: residual(&fa, &fb),
        coarse_residual: residual(&ca, &cb),
        quad_error_estimate: estimate,
        tail,
        warning,
    })
}
