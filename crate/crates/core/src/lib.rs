//! Numerical laboratory for the mixed pressure-velocity regularity criterion
//! of the 3D incompressible Navier–Stokes equations.

pub mod exponents;
pub mod field;
pub mod io;
pub mod lorentz;
pub mod monitor;
pub mod scalar;
pub mod solver;

pub use scalar::Real;

pub type ScalarField64 = field::ScalarField<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type Spectral64 = field::Spectral<f64>;
pub type FlowState64 = solver::FlowState<f64>;
