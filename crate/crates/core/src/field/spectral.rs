use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Domain, FieldError, Grid3, ScalarField, VectorField};
use crate::scalar::Real;

/// Fourier coefficients of a field on a [`Grid3`], unnormalized forward
/// convention: `c(k) = Σ_x f(x) e^{-i k·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: Grid3,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(grid: Grid3, coeffs: Vec<Complex<T>>) -> Result<Self, FieldError> {
        if coeffs.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Index of `-k` for the mode stored at `idx`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.grid.n();
        let (ix, iy, iz) = self.grid.coords(idx);
        self.grid.index((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }

    /// `max |c(-k) - conj c(k)| / max |c|`; zero for transforms of real data.
    pub fn hermitian_defect(&self) -> T {
        let scale = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        if scale.is_zero() {
            return T::zero();
        }
        let worst = (0..self.coeffs.len()).fold(T::zero(), |m, i| {
            let j = self.conjugate_index(i);
            m.max((self.coeffs[j] - self.coeffs[i].conj()).norm())
        });
        worst / scale
    }

    /// Number of coefficients with modulus above `tol · max |c|`.
    pub fn count_active(&self, tol: T) -> usize {
        let scale = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
        self.coeffs.iter().filter(|c| c.norm() > tol * scale).count()
    }
}

/// FFT plans, wavenumbers and dealiasing mask for one grid.
///
/// Every differential operator uses the same discrete wavevector, with the
/// Nyquist component set to zero, so identities such as
/// `div ∘ grad = Δ` and `div ∘ P = 0` hold to rounding.
pub struct Spectral<T: Real> {
    grid: Grid3,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    modes: Vec<i64>,
    k: Vec<T>,
    keep: Vec<bool>,
    dealias: f64,
}

impl<T: Real> Clone for Spectral<T> {
    fn clone(&self) -> Self {
        Spectral {
            grid: self.grid,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            modes: self.modes.clone(),
            k: self.k.clone(),
            keep: self.keep.clone(),
            dealias: self.dealias,
        }
    }
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).field("dealias", &self.dealias).finish()
    }
}

pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

impl<T: Real> Spectral<T> {
    pub fn new(grid: Grid3) -> Self {
        Spectral::with_dealias(grid, DEFAULT_DEALIAS)
    }

    /// Keeps modes with `|m| < fraction · n/2` on every axis.
    pub fn with_dealias(grid: Grid3, fraction: f64) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let modes: Vec<i64> = (0..n).map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 }).collect();
        let base = 2.0 * std::f64::consts::PI / grid.box_length();
        let k = modes
            .iter()
            .map(|&m| if m.unsigned_abs() as usize == n / 2 { T::zero() } else { T::lit(base * m as f64) })
            .collect();
        let cutoff = fraction * n as f64 / 2.0;
        let keep = modes.iter().map(|&m| (m.abs() as f64) < cutoff).collect();
        Spectral { grid, forward, inverse, modes, k, keep, dealias: fraction }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias
    }

    /// Signed integer mode numbers along one axis.
    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    /// Largest retained integer mode after dealiasing.
    pub fn max_kept_mode(&self) -> i64 {
        self.modes.iter().zip(&self.keep).filter(|(_, &k)| k).map(|(m, _)| m.abs()).max().unwrap_or(0)
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [T; 3] {
        let (ix, iy, iz) = self.grid.coords(idx);
        [self.k[ix], self.k[iy], self.k[iz]]
    }

    #[inline]
    pub fn k_sq(&self, idx: usize) -> T {
        let [a, b, c] = self.wavevector(idx);
        a * a + b * b + c * c
    }

    #[inline]
    pub fn is_kept(&self, idx: usize) -> bool {
        let (ix, iy, iz) = self.grid.coords(idx);
        self.keep[ix] && self.keep[iy] && self.keep[iz]
    }

    fn check(&self, grid: &Grid3) -> Result<(), FieldError> {
        if grid.n() != self.grid.n() || grid.box_length() != self.grid.box_length() {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    fn fft3(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.grid.n();
        let plan = if inverse { &self.inverse } else { &self.forward };
        let scratch_len = plan.get_inplace_scratch_len();

        // x lines are contiguous.
        data.par_chunks_mut(n * n).for_each(|slab| {
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
            plan.process_with_scratch(slab, &mut scratch);
        });

        // y lines: transpose each z slab, transform, transpose back.
        data.par_chunks_mut(n * n).for_each(|slab| {
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
            let mut t = vec![Complex::new(T::zero(), T::zero()); n * n];
            for iy in 0..n {
                for ix in 0..n {
                    t[iy + n * ix] = slab[ix + n * iy];
                }
            }
            plan.process_with_scratch(&mut t, &mut scratch);
            for iy in 0..n {
                for ix in 0..n {
                    slab[ix + n * iy] = t[iy + n * ix];
                }
            }
        });

        // z lines: gather one (x, z) plane per y.
        let planes: Vec<Vec<Complex<T>>> = {
            let view: &[Complex<T>] = data;
            (0..n)
                .into_par_iter()
                .map(|iy| {
                    let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
                    let mut t = vec![Complex::new(T::zero(), T::zero()); n * n];
                    for iz in 0..n {
                        for ix in 0..n {
                            t[iz + n * ix] = view[ix + n * (iy + n * iz)];
                        }
                    }
                    plan.process_with_scratch(&mut t, &mut scratch);
                    t
                })
                .collect()
        };
        for (iy, t) in planes.iter().enumerate() {
            for iz in 0..n {
                for ix in 0..n {
                    data[ix + n * (iy + n * iz)] = t[iz + n * ix];
                }
            }
        }
    }

    pub(crate) fn forward_raw(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft3(&mut data, false);
        data
    }

    pub(crate) fn inverse_raw(&self, mut coeffs: Vec<Complex<T>>) -> Vec<T> {
        self.fft3(&mut coeffs, true);
        let norm = T::one() / T::from_usize_lossy(self.grid.len());
        coeffs.into_iter().map(|c| c.re * norm).collect()
    }

    pub fn transform_forward(&self, f: &ScalarField<T>) -> Result<SpectralField<T>, FieldError> {
        self.check(f.grid())?;
        Ok(SpectralField { grid: *f.grid(), coeffs: self.forward_raw(f.values()) })
    }

    /// Inverse transform keeping the real part.
    pub fn transform_inverse(&self, s: &SpectralField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(s.grid())?;
        Ok(ScalarField::from_vec_unchecked(s.grid, self.inverse_raw(s.coeffs.clone())))
    }

    fn physical(&self, grid: Grid3, coeffs: Vec<Complex<T>>) -> ScalarField<T> {
        ScalarField::from_vec_unchecked(grid, self.inverse_raw(coeffs))
    }

    pub fn gradient(&self, f: &ScalarField<T>) -> Result<VectorField<T>, FieldError> {
        self.check(f.grid())?;
        let fh = self.forward_raw(f.values());
        let comps = [0, 1, 2].map(|axis| {
            let d: Vec<Complex<T>> =
                fh.iter().enumerate().map(|(i, &c)| c * Complex::new(T::zero(), self.wavevector(i)[axis])).collect();
            self.physical(*f.grid(), d)
        });
        VectorField::new(comps)
    }

    pub fn divergence(&self, v: &VectorField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(v.grid())?;
        let hats = v.components().each_ref().map(|c| self.forward_raw(c.values()));
        let out = (0..self.grid.len())
            .map(|i| {
                let k = self.wavevector(i);
                let s = hats[0][i] * k[0] + hats[1][i] * k[1] + hats[2][i] * k[2];
                s * Complex::new(T::zero(), T::one())
            })
            .collect();
        Ok(self.physical(*v.grid(), out))
    }

    pub fn laplacian(&self, f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(f.grid())?;
        let mut fh = self.forward_raw(f.values());
        for (i, c) in fh.iter_mut().enumerate() {
            *c = *c * (-self.k_sq(i));
        }
        Ok(self.physical(*f.grid(), fh))
    }

    /// Applies `P = I − k kᵀ/|k|²` to spectral components in place.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn project_coeffs(&self, hats: &mut [Vec<Complex<T>>; 3]) {
        for i in 0..self.grid.len() {
            let ksq = self.k_sq(i);
            if ksq.is_zero() {
                continue;
            }
            let k = self.wavevector(i);
            let dot = (hats[0][i] * k[0] + hats[1][i] * k[1] + hats[2][i] * k[2]) / ksq;
            for a in 0..3 {
                hats[a][i] = hats[a][i] - dot * k[a];
            }
        }
    }

    /// Leray projection onto divergence-free fields.
    pub fn leray_project(&self, v: &VectorField<T>) -> Result<VectorField<T>, FieldError> {
        self.check(v.grid())?;
        let mut hats = v.components().each_ref().map(|c| self.forward_raw(c.values()));
        self.project_coeffs(&mut hats);
        let g = *v.grid();
        VectorField::new(hats.map(|h| self.physical(g, h)))
    }

    /// Riesz transform `R_j`, multiplier `−i k_j/|k|`; modes with `|k| = 0`
    /// (the mean and the Nyquist corners) are sent to zero.
    pub fn riesz_transform(&self, axis: usize, f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(f.grid())?;
        assert!(axis < 3, "axis must be 0, 1 or 2");
        let mut fh = self.forward_raw(f.values());
        for (i, c) in fh.iter_mut().enumerate() {
            let ksq = self.k_sq(i);
            *c = if ksq.is_zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                *c * Complex::new(T::zero(), -self.wavevector(i)[axis] / ksq.sqrt())
            };
        }
        Ok(self.physical(*f.grid(), fh))
    }

    /// Removes the kernel of the discrete gradient (zero mode and Nyquist
    /// corners). On band-limited data this is mean subtraction.
    pub fn remove_gradient_kernel(&self, f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(f.grid())?;
        let mut fh = self.forward_raw(f.values());
        for (i, c) in fh.iter_mut().enumerate() {
            if self.k_sq(i).is_zero() {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        Ok(self.physical(*f.grid(), fh))
    }

    /// Zeroes the modes removed by the dealiasing rule.
    pub fn dealias(&self, f: &ScalarField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(f.grid())?;
        let mut fh = self.forward_raw(f.values());
        for (i, c) in fh.iter_mut().enumerate() {
            if !self.is_kept(i) {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        Ok(self.physical(*f.grid(), fh))
    }

    /// `Σᵢⱼ ∂ᵢ∂ⱼ(vᵢvⱼ)` in spectral form, `−Σ kᵢkⱼ (vᵢvⱼ)^`.
    fn stress_divergence_hat(&self, v: &VectorField<T>) -> Vec<Complex<T>> {
        let c = v.components();
        let mut acc = vec![Complex::new(T::zero(), T::zero()); self.grid.len()];
        for a in 0..3 {
            for b in a..3 {
                let prod: Vec<T> = c[a].values().iter().zip(c[b].values()).map(|(&x, &y)| x * y).collect();
                let ph = self.forward_raw(&prod);
                let mult = if a == b { T::one() } else { T::lit(2.0) };
                for (i, s) in acc.iter_mut().enumerate() {
                    let k = self.wavevector(i);
                    *s = *s - ph[i] * (k[a] * k[b] * mult);
                }
            }
        }
        acc
    }

    /// Mean-zero pressure solving `−Δπ = Σ ∂ᵢ∂ⱼ(vᵢvⱼ)`.
    pub fn pressure_from_velocity(&self, v: &VectorField<T>) -> Result<ScalarField<T>, FieldError> {
        self.check(v.grid())?;
        let div = self.divergence(v)?.max_abs();
        let scale = T::one().max(v.max_abs() * T::lit(2.0 * std::f64::consts::PI / self.grid.box_length()));
        if div > T::lit(1e-8) * scale {
            return Err(FieldError::NotSolenoidal(div.to_f64_lossy()));
        }
        Ok(self.pressure_unchecked(v))
    }

    pub(crate) fn pressure_unchecked(&self, v: &VectorField<T>) -> ScalarField<T> {
        let mut rhs = self.stress_divergence_hat(v);
        for (i, c) in rhs.iter_mut().enumerate() {
            let ksq = self.k_sq(i);
            *c = if ksq.is_zero() { Complex::new(T::zero(), T::zero()) } else { *c / ksq };
        }
        self.physical(*v.grid(), rhs)
    }

    /// `‖Δπ + Σ ∂ᵢ∂ⱼ(vᵢvⱼ)‖∞`.
    pub fn poisson_residual(&self, v: &VectorField<T>, pi: &ScalarField<T>) -> Result<T, FieldError> {
        self.check(v.grid())?;
        let lap = self.laplacian(pi)?;
        let rhs = self.physical(*v.grid(), self.stress_divergence_hat(v));
        lap.zip_map(&rhs, |a, b| a + b).map(|r| r.max_abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// The constant `1` admitted on the torus.
    Unit,
    /// `e^{−|x − x_c|²}` centred in the box.
    Gaussian,
}

/// `e^{−|x − x_c|²}` with `x_c` the box centre, regardless of domain.
pub fn gaussian_profile<T: Real>(grid: &Grid3) -> ScalarField<T> {
    let c = grid.box_length() / 2.0;
    ScalarField::from_fn(*grid, |x, y, z| (-((x - c).powi(2) + (y - c).powi(2) + (z - c).powi(2))).exp())
}

/// The weight entering `V = w + |v|`.
pub fn gauss_weight<T: Real>(grid: &Grid3, kind: WeightKind) -> Result<ScalarField<T>, FieldError> {
    match (grid.domain(), kind) {
        (_, WeightKind::Unit) => Ok(ScalarField::constant(*grid, T::one())),
        (Domain::WindowedR3, WeightKind::Gaussian) => Ok(gaussian_profile(grid)),
        (Domain::Torus, WeightKind::Gaussian) => {
            Err(FieldError::DomainMismatch("Gaussian weight requested on a torus; use the unit weight".into()))
        }
    }
}
