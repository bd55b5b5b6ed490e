//! Uniform periodic grids, real fields and the spectral operators acting on them.

mod spectral;

pub use spectral::{gauss_weight, gaussian_profile, Spectral, SpectralField, WeightKind, DEFAULT_DEALIAS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite sample")]
    NonFinite,
    #[error("velocity is not solenoidal: max |div v| = {0:e}")]
    NotSolenoidal(f64),
    #[error("operation not defined on this domain: {0}")]
    DomainMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Torus,
    /// Whole space approximated by a large periodic box; carries the centred
    /// Gaussian weight.
    WindowedR3,
}

impl Domain {
    pub fn tag(self) -> u8 {
        match self {
            Domain::Torus => 0,
            Domain::WindowedR3 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Domain> {
        match tag {
            0 => Some(Domain::Torus),
            1 => Some(Domain::WindowedR3),
            _ => None,
        }
    }
}

/// `n³` samples on `[0, L)³`, `x` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    box_length: f64,
    domain: Domain,
}

impl Grid3 {
    pub fn new(n: usize, box_length: f64, domain: Domain) -> Result<Self, FieldError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::InvalidGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(FieldError::InvalidGrid(format!("box length {box_length} must be positive")));
        }
        Ok(Grid3 { n, box_length, domain })
    }

    /// The `2π` torus used by the Taylor–Green and shear tests.
    pub fn torus_2pi(n: usize) -> Result<Self, FieldError> {
        Grid3::new(n, 2.0 * std::f64::consts::PI, Domain::Torus)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Physical position of sample `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.coords(idx);
        let h = self.spacing();
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }

    pub fn with_domain(&self, domain: Domain) -> Grid3 {
        Grid3 { domain, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid3,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: Grid3, values: Vec<T>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid3, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Grid3) -> Self {
        ScalarField { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: Grid3, c: T) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f(x, y, z)` at the grid points.
    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y, z] = grid.position(i);
                T::lit(f(x, y, z))
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, FieldError> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn same_grid(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Grid quadrature `Σ f · cell_volume`.
    pub fn integral(&self) -> T {
        let s: T = self.values.iter().copied().sum();
        s * T::lit(self.grid.cell_volume())
    }

    pub fn mean(&self) -> T {
        let s: T = self.values.iter().copied().sum();
        s / T::from_usize_lossy(self.values.len())
    }

    /// `∫ f g` by grid quadrature.
    pub fn inner(&self, other: &Self) -> Result<T, FieldError> {
        self.same_grid(other)?;
        let s: T = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum();
        Ok(s * T::lit(self.grid.cell_volume()))
    }

    pub fn l2_norm(&self) -> T {
        self.inner(self).expect("same grid").sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T, FieldError> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| U::lit(v.to_f64_lossy())).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    components: [ScalarField<T>; 3],
}

impl<T: Real> VectorField<T> {
    pub fn new(components: [ScalarField<T>; 3]) -> Result<Self, FieldError> {
        let g = components[0].grid;
        if components.iter().any(|c| c.grid != g) {
            return Err(FieldError::GridMismatch);
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid3) -> Self {
        VectorField { components: std::array::from_fn(|_| ScalarField::zeros(grid)) }
    }

    pub fn from_fn(grid: Grid3, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let comps = std::array::from_fn(|c| ScalarField::from_fn(grid, |x, y, z| f(x, y, z)[c]));
        VectorField { components: comps }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField<T>; 3] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField<T> {
        &self.components[i]
    }

    pub fn into_components(self) -> [ScalarField<T>; 3] {
        self.components
    }

    pub fn scale(&self, c: T) -> Self {
        VectorField { components: std::array::from_fn(|i| self.components[i].scale(c)) }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        let comps = [0, 1, 2].map(|i| self.components[i].zip_map(&other.components[i], |a, b| a + b));
        let [a, b, c] = comps;
        VectorField::new([a?, b?, c?])
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        let comps = [0, 1, 2].map(|i| self.components[i].zip_map(&other.components[i], |a, b| a - b));
        let [a, b, c] = comps;
        VectorField::new([a?, b?, c?])
    }

    /// `|v|²` pointwise.
    pub fn magnitude_sq(&self) -> ScalarField<T> {
        let g = *self.grid();
        let [a, b, c] = &self.components;
        let values =
            a.values.iter().zip(&b.values).zip(&c.values).map(|((&x, &y), &z)| x * x + y * y + z * z).collect();
        ScalarField::from_vec_unchecked(g, values)
    }

    pub fn magnitude(&self) -> ScalarField<T> {
        self.magnitude_sq().map(|v| v.sqrt())
    }

    /// `∫ u · w`.
    pub fn inner(&self, other: &Self) -> Result<T, FieldError> {
        let mut s = T::zero();
        for i in 0..3 {
            s += self.components[i].inner(&other.components[i])?;
        }
        Ok(s)
    }

    /// `(1/2) ∫ |v|²`.
    pub fn kinetic_energy(&self) -> T {
        self.magnitude_sq().integral() * T::lit(0.5)
    }

    pub fn max_abs(&self) -> T {
        self.magnitude().max_abs()
    }

    pub fn cast<U: Real>(&self) -> VectorField<U> {
        VectorField { components: std::array::from_fn(|i| self.components[i].cast()) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T, FieldError> {
        let mut m = T::zero();
        for i in 0..3 {
            m = m.max(self.components[i].max_abs_diff(&other.components[i])?);
        }
        Ok(m)
    }
}
