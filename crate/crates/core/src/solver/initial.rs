use std::f64::consts::PI;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

use super::{io_error, SolverError};
use crate::field::{FieldError, ScalarField, Spectral, VectorField};
use crate::io::{read_snapshot, SnapshotData};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `A (sin kx cos ky cos kz, −cos kx sin ky cos kz, 0)`, `k = 2π/L`.
    TaylorGreen(f64),
    /// `A (sin ky, 0, 0)`.
    Shear(f64),
    /// Gaussian Fourier modes with shell energy `∝ |k|^slope` inside the
    /// dealiased band, Leray-projected and scaled to unit RMS velocity.
    RandomSolenoidal { seed: u64, slope: f64 },
    /// A velocity snapshot written by this crate.
    FromFile(PathBuf),
}

impl InitialCondition {
    pub fn velocity<T: Real>(&self, spectral: &Spectral<T>) -> Result<VectorField<T>, SolverError> {
        let grid = *spectral.grid();
        let k = 2.0 * PI / grid.box_length();
        match self {
            InitialCondition::TaylorGreen(a) => Ok(VectorField::from_fn(grid, |x, y, z| {
                let cz = (k * z).cos();
                [a * (k * x).sin() * (k * y).cos() * cz, -a * (k * x).cos() * (k * y).sin() * cz, 0.0]
            })),
            InitialCondition::Shear(a) => Ok(VectorField::from_fn(grid, |_, y, _| [a * (k * y).sin(), 0.0, 0.0])),
            InitialCondition::RandomSolenoidal { seed, slope } => Ok(random_solenoidal(spectral, *seed, *slope)),
            InitialCondition::FromFile(path) => {
                let data = read_snapshot(path).map_err(|e| io_error(path, e))?;
                let v = match data {
                    SnapshotData::Vector(v) => v,
                    SnapshotData::Scalar(_) => {
                        return Err(SolverError::InvalidConfig(format!(
                            "{} holds a scalar field, expected a velocity",
                            path.display()
                        )))
                    }
                };
                if v.grid().n() != grid.n() || v.grid().box_length() != grid.box_length() {
                    return Err(FieldError::GridMismatch.into());
                }
                Ok(v.cast())
            }
        }
    }
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn random_solenoidal<T: Real>(spectral: &Spectral<T>, seed: u64, slope: f64) -> VectorField<T> {
    let grid = *spectral.grid();
    let len = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hats: [Vec<Complex<T>>; 3] = std::array::from_fn(|_| vec![Complex::new(T::zero(), T::zero()); len]);
    let base = 2.0 * PI / grid.box_length();
    for i in 0..len {
        // Draw unconditionally so the stream does not depend on the mask.
        let draws: [f64; 6] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let ksq = spectral.k_sq(i).to_f64_lossy();
        if ksq == 0.0 || !spectral.is_kept(i) {
            continue;
        }
        // Shell area grows like |k|², so the per-mode amplitude carries |k|^{(slope−2)/2}.
        let amp = (ksq.sqrt() / base).powf((slope - 2.0) / 2.0);
        for a in 0..3 {
            hats[a][i] = Complex::new(T::lit(amp * draws[2 * a]), T::lit(amp * draws[2 * a + 1]));
        }
    }
    spectral.project_coeffs(&mut hats);
    let comps = hats.map(|h| ScalarField::from_vec_unchecked(grid, spectral.inverse_raw(h)));
    let v = VectorField::new(comps).expect("shared grid");
    let rms = (v.magnitude_sq().mean()).sqrt();
    if rms > T::zero() {
        v.scale(T::one() / rms)
    } else {
        v
    }
}
