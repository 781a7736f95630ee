//! Landau collision kernel, Maxwellian and linearized-operator coefficients.

mod fft;
pub mod coeffs;
pub mod kernel;
pub mod quadrature;

pub use coeffs::{
    central_gradient, compute_sigma, fit_sigma_bounds, sigma_holder_modulus, CoefficientBounds, GSource,
    GridConvolver, HolderModulusReport, LandauCoefficientSet, MaxwellianTable, QuadratureSpec, SigmaBoundFit,
    SigmaTable,
};
pub use kernel::{kernel_phi, maxwellian, sigma_at_origin, sqrt_maxwellian, LATTICE_ZETA};
pub use quadrature::{PointConvolution, PointQuadrature};
