//! Pseudo-spectral Navier–Stokes integrator on the periodic box.
//!
//! The state is advanced in Fourier space with a fourth-order Runge–Kutta
//! scheme whose viscous part is handled exactly by the integrating factor
//! `exp(−ν|k|²t)`. The nonlinearity is evaluated in divergence form,
//! `P ∇·(v ⊗ v)`, with products formed on the grid and the 2/3 rule applied.

pub(crate) mod initial;

pub use initial::InitialCondition;

use rustfft::num_complex::Complex;
use thiserror::Error;

use crate::field::{FieldError, Grid3, ScalarField, Spectral, VectorField, DEFAULT_DEALIAS};
use crate::scalar::Real;

/// Classical RK4 is stable on the negative real axis for `|λ h| ≤ 2.785`.
pub const VISCOUS_STABILITY: f64 = 2.785;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dt = {dt:e} exceeds the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("io failure: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid3,
    pub dt: TimeStep,
    pub t_start: f64,
    pub t_end: f64,
    pub dealias: f64,
    pub cfl_safety: f64,
    pub snapshot_every: usize,
    pub viscosity: f64,
    pub initial_condition: InitialCondition,
}

impl SolverConfig {
    pub fn new(grid: Grid3, t_end: f64, initial_condition: InitialCondition) -> Self {
        SolverConfig {
            grid,
            dt: TimeStep::Auto,
            t_start: 0.0,
            t_end,
            dealias: DEFAULT_DEALIAS,
            cfl_safety: 0.5,
            snapshot_every: 1,
            viscosity: 1.0,
            initial_condition,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !self.t_end.is_finite() || !self.t_start.is_finite() || self.t_end <= self.t_start {
            return bad("t_end must be finite and exceed t_start");
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return bad("dt must be positive");
            }
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return bad("dealias fraction must lie in (0, 1]");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1");
        }
        if !self.viscosity.is_finite() || self.viscosity <= 0.0 {
            return bad("viscosity must be positive");
        }
        Ok(())
    }
}

/// Velocity, pressure and time at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T> {
    pub t: f64,
    pub v: VectorField<T>,
    pub pi: ScalarField<T>,
}

impl<T: Real> FlowState<T> {
    /// Recomputes the pressure from `v` through the Poisson equation.
    pub fn new(spectral: &Spectral<T>, t: f64, v: VectorField<T>) -> Result<Self, SolverError> {
        let pi = spectral.pressure_from_velocity(&v)?;
        Ok(FlowState { t, v, pi })
    }
}

/// `safety · min(Δx / max|v|, Δx² · 2.785/(π²ν))`; the advective limit is
/// dropped for a fluid at rest.
pub fn cfl_dt<T: Real>(v: &VectorField<T>, grid: &Grid3, safety: f64, viscosity: f64) -> f64 {
    let dx = grid.spacing();
    let viscous = dx * dx * VISCOUS_STABILITY / (std::f64::consts::PI.powi(2) * viscosity);
    let vmax = v.max_abs().to_f64_lossy();
    let bound = if vmax > 0.0 { (dx / vmax).min(viscous) } else { viscous };
    safety * bound
}

type Hat<T> = [Vec<Complex<T>>; 3];

fn zero_hat<T: Real>(len: usize) -> Hat<T> {
    std::array::from_fn(|_| vec![Complex::new(T::zero(), T::zero()); len])
}

/// Precomputed spectral machinery for one grid and viscosity.
#[derive(Debug, Clone)]
pub struct Integrator<T: Real> {
    spectral: Spectral<T>,
    viscosity: f64,
    k_sq: Vec<T>,
}

impl<T: Real> Integrator<T> {
    pub fn new(grid: Grid3, dealias: f64, viscosity: f64) -> Self {
        let spectral = Spectral::with_dealias(grid, dealias);
        let k_sq = (0..grid.len()).map(|i| spectral.k_sq(i)).collect();
        Integrator { spectral, viscosity, k_sq }
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    fn to_hat(&self, v: &VectorField<T>) -> Hat<T> {
        v.components().each_ref().map(|c| self.spectral.forward_raw(c.values()))
    }

    fn physical_of(&self, h: &Hat<T>) -> VectorField<T> {
        let g = *self.spectral.grid();
        VectorField::new(h.clone().map(|c| ScalarField::from_vec_unchecked(g, self.spectral.inverse_raw(c))))
            .expect("components share the grid")
    }

    /// `−P ∇·(v ⊗ v)` for the dealiased part of `û`, returned dealiased.
    fn rhs(&self, u: &Hat<T>) -> Hat<T> {
        let len = self.k_sq.len();
        let sp = &self.spectral;
        let mut trunc = u.clone();
        for c in trunc.iter_mut() {
            for (i, x) in c.iter_mut().enumerate() {
                if !sp.is_kept(i) {
                    *x = Complex::new(T::zero(), T::zero());
                }
            }
        }
        let phys: [Vec<T>; 3] = trunc.map(|c| sp.inverse_raw(c));
        let mut out = zero_hat::<T>(len);
        for a in 0..3 {
            for b in a..3 {
                let prod: Vec<T> = phys[a].iter().zip(&phys[b]).map(|(&x, &y)| x * y).collect();
                let ph = sp.forward_raw(&prod);
                for i in 0..len {
                    if !sp.is_kept(i) {
                        continue;
                    }
                    let k = sp.wavevector(i);
                    // ∂_b (v_a v_b) contributes to component a, and symmetrically.
                    let d = ph[i] * Complex::new(T::zero(), T::one());
                    out[a][i] = out[a][i] - d * k[b];
                    if a != b {
                        out[b][i] = out[b][i] - d * k[a];
                    }
                }
            }
        }
        sp.project_coeffs(&mut out);
        out
    }

    /// `P(v·∇v)` evaluated with the 2/3 rule; output is solenoidal.
    pub fn nonlinear_term(&self, v: &VectorField<T>) -> Result<VectorField<T>, SolverError> {
        let div = self.spectral.divergence(v)?.max_abs();
        let scale = T::one().max(v.max_abs() * T::lit(2.0 * std::f64::consts::PI / v.grid().box_length()));
        if div > T::lit(1e-8) * scale {
            return Err(FieldError::NotSolenoidal(div.to_f64_lossy()).into());
        }
        let mut h = self.rhs(&self.to_hat(v));
        for c in h.iter_mut() {
            for x in c.iter_mut() {
                *x = -*x;
            }
        }
        Ok(self.physical_of(&h))
    }

    fn decay(&self, h: f64) -> Vec<T> {
        let nh = T::lit(self.viscosity * h);
        self.k_sq.iter().map(|&k| (-nh * k).exp()).collect()
    }

    fn rk4_hat(&self, u: &Hat<T>, h: f64, e_half: &[T], e_full: &[T]) -> Hat<T> {
        let len = self.k_sq.len();
        let hh = T::lit(h);
        let half = T::lit(h / 2.0);
        let sixth = T::lit(h / 6.0);
        let two = T::lit(2.0);
        let combine = |f: &dyn Fn(usize, usize) -> Complex<T>| -> Hat<T> {
            std::array::from_fn(|a| (0..len).map(|i| f(a, i)).collect())
        };

        let k1 = self.rhs(u);
        let k2 = self.rhs(&combine(&|a, i| (u[a][i] + k1[a][i] * half) * e_half[i]));
        let k3 = self.rhs(&combine(&|a, i| u[a][i] * e_half[i] + k2[a][i] * half));
        let k4 = self.rhs(&combine(&|a, i| u[a][i] * e_full[i] + k3[a][i] * e_half[i] * hh));
        combine(&|a, i| {
            u[a][i] * e_full[i] + (k1[a][i] * e_full[i] + (k2[a][i] + k3[a][i]) * e_half[i] * two + k4[a][i]) * sixth
        })
    }

    fn check_dt(&self, v: &VectorField<T>, dt: f64) -> Result<(), SolverError> {
        let bound = cfl_dt(v, self.spectral.grid(), 1.0, self.viscosity);
        // Rounding t_end/dt to an integer may nudge dt up by a hair.
        if dt > bound * (1.0 + 1e-9) {
            return Err(SolverError::StabilityViolation { dt, bound });
        }
        Ok(())
    }

    /// One integrating-factor RK4 step; the pressure is recomputed at the end.
    pub fn step(&self, state: &FlowState<T>, dt: f64) -> Result<FlowState<T>, SolverError> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(SolverError::InvalidConfig("dt must be positive".into()));
        }
        self.check_dt(&state.v, dt)?;
        let u = self.to_hat(&state.v);
        let next = self.rk4_hat(&u, dt, &self.decay(dt / 2.0), &self.decay(dt));
        FlowState::new(&self.spectral, state.t + dt, self.physical_of(&next))
    }
}

/// Resolved time stepping: `steps` steps of size `dt` reach `t_end` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub steps: usize,
}

pub fn schedule<T: Real>(config: &SolverConfig, v0: &VectorField<T>) -> Schedule {
    let span = config.t_end - config.t_start;
    let target = match config.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => cfl_dt(v0, &config.grid, config.cfl_safety, config.viscosity),
    };
    let steps = ((span / target) - 1e-9).ceil().max(1.0) as usize;
    Schedule { dt: span / steps as f64, steps }
}

/// Runs the configured simulation and hands each snapshot to `sink`
/// (the initial state included, then every `snapshot_every` steps and the
/// final state).
pub fn simulate_with<T: Real>(
    config: &SolverConfig,
    mut sink: impl FnMut(usize, &FlowState<T>) -> Result<(), SolverError>,
) -> Result<Schedule, SolverError> {
    config.validate()?;
    let integ = Integrator::<T>::new(config.grid, config.dealias, config.viscosity);
    let v0 = config.initial_condition.velocity::<T>(integ.spectral())?;
    let sched = schedule(config, &v0);
    integ.check_dt(&v0, sched.dt)?;

    let e_half = integ.decay(sched.dt / 2.0);
    let e_full = integ.decay(sched.dt);
    let mut u = integ.to_hat(&v0);
    sink(0, &FlowState::new(integ.spectral(), config.t_start, v0)?)?;
    for s in 1..=sched.steps {
        u = integ.rk4_hat(&u, sched.dt, &e_half, &e_full);
        if s % config.snapshot_every == 0 || s == sched.steps {
            let t = config.t_start + s as f64 * sched.dt;
            let state = FlowState::new(integ.spectral(), t, integ.physical_of(&u))?;
            let bound = cfl_dt(&state.v, &config.grid, 1.0, config.viscosity);
            if sched.dt > bound * (1.0 + 1e-9) {
                return Err(SolverError::StabilityViolation { dt: sched.dt, bound });
            }
            sink(s, &state)?;
        }
    }
    Ok(sched)
}

/// In-memory trajectory.
pub fn simulate<T: Real>(config: &SolverConfig) -> Result<Vec<FlowState<T>>, SolverError> {
    let mut out = Vec::new();
    simulate_with(config, |_, s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// `(1/2)‖v‖₂²` and `‖∇v‖₂²` evaluated spectrally.
pub fn energy_and_dissipation<T: Real>(spectral: &Spectral<T>, v: &VectorField<T>) -> Result<(T, T), FieldError> {
    let mut diss = T::zero();
    for c in v.components() {
        let g = spectral.gradient(c)?;
        diss += g.magnitude_sq().integral();
    }
    Ok((v.kinetic_energy(), diss))
}

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> SolverError {
    SolverError::Io(format!("{}: {e}", path.display()))
}
