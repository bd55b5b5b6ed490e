//! Link-by-link evaluation of the pressure estimate
//!
//! ```text
//! ∫|π|²|v|² ≤ ∫|π̃|^β |π|^{2−β} V^{2β}
//!           ≤ C_H ‖π̃‖^β_{q,∞} ‖π‖^{2−β}_{t₁,2} ‖V²‖^β_{t₂,2}
//!           ≤ C_H C_R^{2−β} ‖π̃‖^β_{q,∞} ‖V²‖^{2−β}_{t₁,2} ‖V²‖^β_{t₂,2}
//!           ≤ M ‖V²‖₂^{2−s} Z^s
//!           ≤ ε Z² + C_ε M^{r'} ‖V²‖₂²
//! ```
//! with `t₁ = (2−β)r₁`, `t₂ = βr₂`, `s = δ₁(2−β) + δ₂β`, `r = 2/s`, and
//! `Z = ‖∇V²‖₂` on the whole space or `‖V²‖₂ + ‖∇V²‖₂` on the torus. The
//! last line is then expanded in terms of `v` alone.

use serde::Serialize;

use super::ledger::{grad_mod_sq, velocity_gradient};
use super::{tilde_pi, v_shift, MonitorConfig, MonitorConstants, MonitorError};
use crate::exponents::{ExponentError, ExponentSolution, ExtendedRational, Rational};
use crate::field::{Domain, ScalarField, Spectral, VectorField, WeightKind};
use crate::lorentz::{lebesgue_norm, lorentz_norm, weak_norm};
use crate::scalar::Real;

/// `(π/4)^{3/2} = ∫_{ℝ³} e^{−4|x|²}`.
fn gauss4_integral() -> f64 {
    (std::f64::consts::PI / 4.0).powf(1.5)
}

/// Every norm of one snapshot that the chain needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotNorms {
    pub t: f64,
    /// `∫|π|²|v|²`.
    pub lhs: f64,
    /// `∫|π̃|^β |π|^{2−β} V^{2β}`.
    pub pointwise: f64,
    /// `‖π̃‖_{q,∞}`.
    pub tilde_pi_weak: f64,
    pub pi_t1: Option<f64>,
    pub vsq_t1: Option<f64>,
    pub v2_t1: Option<f64>,
    pub v2_t2: f64,
    /// `‖V²‖₂`.
    pub v2_l2: f64,
    /// `‖V²‖_{6,2}`.
    pub v2_l62: f64,
    /// `‖V² − mean(V²)‖_{6,2}`.
    pub v2_centered_l62: f64,
    /// `‖∇V²‖₂`.
    pub grad_v2_l2: f64,
    pub control: ControlTerms,
}

/// The `v`-only quantities entering the expanded bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlTerms {
    pub volume: f64,
    pub v_l2_sq: f64,
    pub vsq_l2_sq: f64,
    pub grad_v_l2_sq: f64,
    pub grad_vsq_l2_sq: f64,
}

fn rf<T: Real>(x: T) -> f64 {
    x.to_f64_lossy()
}

fn lorentz2<T: Real>(f: &ScalarField<T>, t: &Rational) -> Result<f64, MonitorError> {
    Ok(rf(lorentz_norm(f, t, &Rational::int(2))?.value))
}

impl SnapshotNorms {
    pub fn compute<T: Real>(
        spectral: &Spectral<T>,
        t: f64,
        v: &VectorField<T>,
        pi: &ScalarField<T>,
        sol: &ExponentSolution,
        kind: WeightKind,
    ) -> Result<Self, MonitorError> {
        let shift = v_shift(v, kind);
        let tp = tilde_pi(pi, &shift, &sol.theta)?;
        let msq = v.magnitude_sq();
        let v2 = shift.map(|x| x * x);
        let beta = T::lit(sol.beta.to_f64());
        let two = T::lit(2.0);

        let lhs = pi.map(|x| x * x).inner(&msq)?;
        let pointwise: T = tp
            .values()
            .iter()
            .zip(pi.values())
            .zip(shift.values())
            .map(|((&a, &b), &s)| a.abs().powf(beta) * b.abs().powf(two - beta) * s.powf(two * beta))
            .sum::<T>()
            * T::lit(v.grid().cell_volume());

        let (pi_t1, vsq_t1, v2_t1) = match sol.target1() {
            Some(t1) => (Some(lorentz2(pi, &t1)?), Some(lorentz2(&msq, &t1)?), Some(lorentz2(&v2, &t1)?)),
            None => (None, None, None),
        };
        let six = Rational::int(6);
        let v2_l62 = lorentz2(&v2, &six)?;
        let mean = v2.mean();
        let v2_centered_l62 = lorentz2(&v2.map(|x| x - mean), &six)?;

        let grads = velocity_gradient(spectral, v)?;
        let grad_v_sq: T = grads.iter().map(|g| g.magnitude_sq().integral()).sum();
        let grad_vsq_sq = grad_mod_sq(v, &grads).magnitude_sq().integral();

        Ok(SnapshotNorms {
            t,
            lhs: rf(lhs),
            pointwise: rf(pointwise),
            tilde_pi_weak: rf(weak_norm(&tp, &sol.q)?.value),
            pi_t1,
            vsq_t1,
            v2_t1,
            v2_t2: lorentz2(&v2, &sol.target2())?,
            v2_l2: rf(lebesgue_norm(&v2, &Rational::int(2))?),
            v2_l62,
            v2_centered_l62,
            grad_v2_l2: rf(spectral.gradient(&v2)?.magnitude_sq().integral().sqrt()),
            control: ControlTerms {
                volume: v.grid().volume(),
                v_l2_sq: rf(msq.integral()),
                vsq_l2_sq: rf(msq.inner(&msq)?),
                grad_v_l2_sq: rf(grad_v_sq),
                grad_vsq_l2_sq: rf(grad_vsq_sq),
            },
        })
    }
}

/// Successive right-hand sides of the chain; each must dominate the previous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainLinks {
    pub lhs: f64,
    pub pointwise: f64,
    pub holder: f64,
    pub riesz: f64,
    pub interp_sobolev: f64,
    pub young: f64,
    pub expanded: f64,
}

impl ChainLinks {
    pub fn as_array(&self) -> [(&'static str, f64); 7] {
        [
            ("lhs", self.lhs),
            ("pointwise", self.pointwise),
            ("holder", self.holder),
            ("riesz", self.riesz),
            ("interp_sobolev", self.interp_sobolev),
            ("young", self.young),
            ("expanded", self.expanded),
        ]
    }
}

/// Direct values of `‖V²‖₂²` and `Z²` next to their expansions in `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VControl {
    pub x_sq: f64,
    pub x_sq_bound: f64,
    pub z_sq: f64,
    pub z_sq_bound: f64,
    /// Coefficient of `‖∇|v|²‖₂²` inside `z_sq_bound`.
    pub grad_mod_coeff: f64,
}

/// Interpolation exponent `δ` of a target `t ∈ (2, 6)`:
/// `1/t = (1−δ)/2 + δ/6`.
pub fn delta_of_target(t: &Rational) -> Result<Rational, ExponentError> {
    let (two, six) = (Rational::int(2), Rational::int(6));
    if t <= &two || t >= &six {
        return Err(ExponentError::QOutOfRange(
            ExtendedRational::Finite(t.clone()),
            "Lorentz target must lie in (2, 6)".into(),
        ));
    }
    Ok(Rational::new(3, 2)? - Rational::int(3).checked_div(t)?)
}

/// Sobolev constant of the form used on `domain`: on the torus the mean is
/// restored through `‖1‖_{6,2} = √3 |Ω|^{1/6}` and `|f̄| ≤ |Ω|^{−1/2}‖f‖₂`.
pub fn effective_sobolev(constants: &MonitorConstants, domain: Domain, volume: f64) -> f64 {
    match domain {
        Domain::Torus => constants.sobolev.max(3f64.sqrt() * volume.powf(-1.0 / 3.0)),
        Domain::WindowedR3 => constants.sobolev,
    }
}

fn z_value(norms: &SnapshotNorms, domain: Domain) -> f64 {
    match domain {
        Domain::Torus => norms.v2_l2 + norms.grad_v2_l2,
        Domain::WindowedR3 => norms.grad_v2_l2,
    }
}

/// `C_I K_S^δ ‖V²‖₂^{1−δ} Z^δ` for the target `t`, where `δ` follows from `t`.
pub fn interp_sobolev_bound(
    norms: &SnapshotNorms,
    target: &Rational,
    constants: &MonitorConstants,
    domain: Domain,
) -> Result<f64, MonitorError> {
    let delta = delta_of_target(target)?.to_f64();
    let ks = effective_sobolev(constants, domain, norms.control.volume);
    let z = z_value(norms, domain);
    Ok(constants.interp * ks.powf(delta) * norms.v2_l2.powf(1.0 - delta) * z.powf(delta))
}

/// `(lhs, C_H C_R^{2−β} ‖π̃‖^β ‖V²‖^{2−β}_{t₁,2} ‖V²‖^β_{t₂,2})`.
pub fn holder_chain(norms: &SnapshotNorms, sol: &ExponentSolution, constants: &MonitorConstants) -> (f64, f64) {
    let beta = sol.beta.to_f64();
    let leg1 = norms.v2_t1.map_or(1.0, |x| x.powf(2.0 - beta));
    let bound = constants.holder
        * constants.riesz.powf(2.0 - beta)
        * norms.tilde_pi_weak.powf(beta)
        * leg1
        * norms.v2_t2.powf(beta);
    (norms.lhs, bound)
}

fn young_split(eps: f64, s: f64) -> (f64, f64) {
    let r = 2.0 / s;
    let r_conj = 2.0 / (2.0 - s);
    (r_conj, (eps * r).powf(-r_conj / r) / r_conj)
}

/// Expansions of `‖V²‖₂²` and `Z²` in terms of `v`.
pub fn v_control(norms: &SnapshotNorms, kind: WeightKind, domain: Domain) -> VControl {
    let c = &norms.control;
    let (w2_sq, grad_w2_sq, grad_w_sup_sq) = match kind {
        WeightKind::Unit => (c.volume, 0.0, 0.0),
        WeightKind::Gaussian => (gauss4_integral(), 6.0 * gauss4_integral(), 2.0 * (-1.0f64).exp()),
    };
    let x_sq_bound = 3.0 * (w2_sq + 4.0 * c.v_l2_sq + c.vsq_l2_sq);
    let (g_bound, g_coeff) = match kind {
        WeightKind::Unit => (2.0 * (4.0 * c.grad_v_l2_sq + c.grad_vsq_l2_sq), 2.0),
        WeightKind::Gaussian => {
            (4.0 * (grad_w2_sq + 4.0 * grad_w_sup_sq * c.v_l2_sq + 4.0 * c.grad_v_l2_sq + c.grad_vsq_l2_sq), 4.0)
        }
    };
    let (z_sq, z_sq_bound, grad_mod_coeff) = match domain {
        Domain::Torus => (z_value(norms, domain).powi(2), 2.0 * x_sq_bound + 2.0 * g_bound, 2.0 * g_coeff),
        Domain::WindowedR3 => (norms.grad_v2_l2.powi(2), g_bound, g_coeff),
    };
    VControl { x_sq: norms.v2_l2.powi(2), x_sq_bound, z_sq, z_sq_bound, grad_mod_coeff }
}

/// Checks that the Young step produces the time exponent on the line.
pub fn absorption_exponent_check(sol: &ExponentSolution, p: &Rational) -> Result<Rational, MonitorError> {
    let e = sol.absorption_exponent()?;
    if &e != p {
        return Err(ExponentError::RelationViolated(format!("absorption exponent {e} differs from p = {p}")).into());
    }
    Ok(e)
}

/// All links at once.
pub fn chain_links(
    norms: &SnapshotNorms,
    sol: &ExponentSolution,
    cfg: &MonitorConfig,
    constants: &MonitorConstants,
    domain: Domain,
) -> Result<(ChainLinks, VControl), MonitorError> {
    let kind = cfg.weight_kind(domain);
    let beta = sol.beta.to_f64();
    let (lhs, riesz) = holder_chain(norms, sol, constants);
    let leg1 = norms.pi_t1.map_or(1.0, |x| x.powf(2.0 - beta));
    let holder = constants.holder * norms.tilde_pi_weak.powf(beta) * leg1 * norms.v2_t2.powf(beta);

    let t2 = sol.target2();
    let b1 = match sol.target1() {
        Some(t1) => interp_sobolev_bound(norms, &t1, constants, domain)?.powf(2.0 - beta),
        None => 1.0,
    };
    let b2 = interp_sobolev_bound(norms, &t2, constants, domain)?.powf(beta);
    let core = constants.holder * constants.riesz.powf(2.0 - beta) * norms.tilde_pi_weak.powf(beta);
    let interp_sobolev = core * b1 * b2;

    // interp_sobolev = M X^{2−s} Z^s with s the weighted δ.
    let s = sol.weighted_delta().to_f64();
    let ks = effective_sobolev(constants, domain, norms.control.volume);
    let m = core * constants.interp.powi(2) * ks.powf(s);
    let (r_conj, c_eps) = young_split(cfg.epsilon, s);
    let z = z_value(norms, domain);
    let young = cfg.epsilon * z * z + c_eps * m.powf(r_conj) * norms.v2_l2.powi(2);

    let control = v_control(norms, kind, domain);
    let expanded = cfg.epsilon * control.z_sq_bound + c_eps * m.powf(r_conj) * control.x_sq_bound;
    Ok((ChainLinks { lhs, pointwise: norms.pointwise, holder, riesz, interp_sobolev, young, expanded }, control))
}

/// Right-hand side of the absorbed estimate expanded in `v`; checks first
/// that the exponent produced by the Young step equals `p` on the line.
pub fn absorption_bound(
    norms: &SnapshotNorms,
    cfg: &MonitorConfig,
    constants: &MonitorConstants,
    domain: Domain,
) -> Result<f64, MonitorError> {
    let sol = cfg.solution()?;
    absorption_exponent_check(&sol, &cfg.derived_p()?)?;
    Ok(chain_links(norms, &sol, cfg, constants, domain)?.0.expanded)
}
