use serde::Serialize;

use super::MonitorError;
use crate::field::{FieldError, ScalarField, Spectral, VectorField};
use crate::scalar::Real;
use crate::solver::FlowState;

/// Spatial integrals entering the `L⁴` energy inequality at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    /// `∫|v|⁴`.
    pub l4_fourth: f64,
    /// `(1/2)∫|∇v|²|v|²`.
    pub grad_weighted: f64,
    /// `(1/2)∫|∇|v|²|²`.
    pub grad_sq_mod: f64,
    /// `∫|π|²|v|²`.
    pub rhs_pressure: f64,
    /// Fraction of the spectral energy in the outermost retained shell.
    pub tail_fraction: f64,
}

/// `∇v` as nine fields, `grads[i]` holding `∇vᵢ`.
pub(crate) fn velocity_gradient<T: Real>(
    spectral: &Spectral<T>,
    v: &VectorField<T>,
) -> Result<[VectorField<T>; 3], FieldError> {
    let [a, b, c] = v.components().each_ref().map(|c| spectral.gradient(c));
    Ok([a?, b?, c?])
}

/// `∇|v|² = 2 Σᵢ vᵢ ∇vᵢ`, formed pointwise so no product is differentiated spectrally.
pub(crate) fn grad_mod_sq<T: Real>(v: &VectorField<T>, grads: &[VectorField<T>; 3]) -> VectorField<T> {
    let g = *v.grid();
    let two = T::lit(2.0);
    let comps = std::array::from_fn(|j| {
        let vals = (0..g.len())
            .map(|k| two * (0..3).map(|i| v.component(i).values()[k] * grads[i].component(j).values()[k]).sum::<T>())
            .collect();
        ScalarField::new(g, vals).expect("finite")
    });
    VectorField::new(comps).expect("same grid")
}

pub(crate) fn grad_sq_total<T: Real>(grads: &[VectorField<T>; 3]) -> ScalarField<T> {
    let m = grads.each_ref().map(|g| g.magnitude_sq());
    m[0].zip_map(&m[1], |a, b| a + b).and_then(|s| s.zip_map(&m[2], |a, b| a + b)).expect("same grid")
}

fn tail_fraction<T: Real>(spectral: &Spectral<T>, v: &VectorField<T>) -> Result<f64, FieldError> {
    let kmax = spectral.max_kept_mode();
    let modes = spectral.modes();
    let n = v.grid().n();
    let (mut tail, mut total) = (0.0, 0.0);
    for c in v.components() {
        let h = spectral.transform_forward(c)?;
        for (i, z) in h.coeffs().iter().enumerate() {
            let e = z.norm_sqr().to_f64_lossy();
            total += e;
            let (ix, iy, iz) = (i % n, (i / n) % n, i / (n * n));
            let m = modes[ix].abs().max(modes[iy].abs()).max(modes[iz].abs());
            if m >= kmax {
                tail += e;
            }
        }
    }
    Ok(if total > 0.0 { tail / total } else { 0.0 })
}

pub fn energy_terms<T: Real>(spectral: &Spectral<T>, state: &FlowState<T>) -> Result<EnergyTerms, MonitorError> {
    let v = &state.v;
    let grads = velocity_gradient(spectral, v)?;
    let msq = v.magnitude_sq();
    let gsq = grad_sq_total(&grads);
    let gm = grad_mod_sq(v, &grads).magnitude_sq();
    let half = T::lit(0.5);
    let l4 = msq.inner(&msq)?;
    let gw = gsq.inner(&msq)? * half;
    let gmod = gm.integral() * half;
    let pi2 = state.pi.zip_map(&state.pi, |a, b| a * b)?;
    let rhs = pi2.inner(&msq)?;
    Ok(EnergyTerms {
        l4_fourth: l4.to_f64_lossy(),
        grad_weighted: gw.to_f64_lossy(),
        grad_sq_mod: gmod.to_f64_lossy(),
        rhs_pressure: rhs.to_f64_lossy(),
        tail_fraction: tail_fraction(spectral, v)?,
    })
}

/// One interior snapshot of the ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub l4_fourth: f64,
    /// Centred difference of `(1/4)∫|v|⁴`.
    pub ddt_l4: f64,
    pub grad_weighted: f64,
    pub grad_sq_mod: f64,
    pub rhs_pressure: f64,
    pub tol_ledger: f64,
    /// `rhs + tol − lhs`; the inequality holds iff this is non-negative.
    pub ledger_margin: f64,
    pub tilde_pi_weak: f64,
    pub v_shift_l2: f64,
    pub holder_bound: f64,
    pub absorbed_bound: f64,
}

impl LedgerRow {
    pub fn lhs(&self) -> f64 {
        self.ddt_l4 + self.grad_weighted + self.grad_sq_mod
    }

    pub fn holds(&self) -> bool {
        self.ledger_margin >= 0.0
    }
}

pub(crate) fn check_uniform(times: &[f64]) -> Result<f64, MonitorError> {
    let h = times[1] - times[0];
    if h.is_nan() || h <= 0.0 || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(MonitorError::NonUniformSpacing);
    }
    Ok(h)
}

/// Rows for every interior snapshot, from precomputed per-snapshot terms.
///
/// `tol_ledger = c_tol · (h² + tail) · scale` where `h` is the snapshot
/// spacing, `tail` the resolution indicator and `scale` the sum of the
/// magnitudes of all terms in the row.
pub(crate) fn rows_from_terms(
    times: &[f64],
    terms: &[EnergyTerms],
    c_tol: f64,
) -> Result<Vec<LedgerRow>, MonitorError> {
    if terms.len() < 3 {
        return Err(MonitorError::InsufficientSnapshots { needed: 3, got: terms.len() });
    }
    let h = check_uniform(times)?;
    Ok((1..terms.len() - 1)
        .map(|i| {
            let e = &terms[i];
            let ddt = (terms[i + 1].l4_fourth - terms[i - 1].l4_fourth) / 4.0 / (times[i + 1] - times[i - 1]);
            let scale = ddt.abs() + e.grad_weighted + e.grad_sq_mod + e.rhs_pressure;
            let tol = c_tol * (h * h + e.tail_fraction) * scale;
            let lhs = ddt + e.grad_weighted + e.grad_sq_mod;
            LedgerRow {
                t: times[i],
                l4_fourth: e.l4_fourth,
                ddt_l4: ddt,
                grad_weighted: e.grad_weighted,
                grad_sq_mod: e.grad_sq_mod,
                rhs_pressure: e.rhs_pressure,
                tol_ledger: tol,
                ledger_margin: e.rhs_pressure + tol - lhs,
                tilde_pi_weak: 0.0,
                v_shift_l2: 0.0,
                holder_bound: 0.0,
                absorbed_bound: 0.0,
            }
        })
        .collect())
}

/// Energy ledger over a uniformly spaced trajectory (first and last
/// snapshots only feed the centred differences).
pub fn energy_ledger<T: Real>(
    spectral: &Spectral<T>,
    states: &[FlowState<T>],
    c_tol: f64,
) -> Result<Vec<LedgerRow>, MonitorError> {
    if states.len() < 3 {
        return Err(MonitorError::InsufficientSnapshots { needed: 3, got: states.len() });
    }
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let terms = states.iter().map(|s| energy_terms(spectral, s)).collect::<Result<Vec<_>, _>>()?;
    rows_from_terms(&times, &terms, c_tol)
}
