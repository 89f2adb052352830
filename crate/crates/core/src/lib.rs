//! Weighted Laplacians `Δ_φ = Δ - ⟨∇φ, ∇⟩` on rotationally symmetric model
//! manifolds: curvature bookkeeping, comparison bounds, spectra, heat kernels,
//! and numerical audits of the associated inequalities.
//!
//! The numerical layers are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix them to `f64`, which is what the audits use.

pub mod audit;
pub mod comparison;
pub mod discrete;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod jet;
pub mod profile;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::ModelManifold;
pub use scalar::Real;

pub type Grid = discrete::RadialGrid<f64>;
pub type Operator = discrete::ModeOperator<f64>;
pub type Spectrum = discrete::Spectrum<f64>;
pub type Kernel = heat::SpectralKernel<f64>;
pub type Solution = heat::HeatSolution<f64>;
pub type Field = discrete::RadialField<f64>;
