//! Hypothesis evaluation for the mixed pressure–velocity criterion and a
//! term-by-term check of the energy-estimate chain along a trajectory.

mod calibrate;
mod chain;
mod ledger;
mod report;

pub use calibrate::{calibrate, CalibrationOptions, CalibrationSummary};
pub use chain::{
    absorption_bound, holder_chain, interp_sobolev_bound, ChainLinks, ControlTerms, SnapshotNorms, VControl,
};
pub use ledger::{energy_ledger, energy_terms, EnergyTerms, LedgerRow};
pub use report::{criterion_integral, gronwall_envelope, run_monitor, GronwallPoint, MonitorReport, Verdict};

use serde::Serialize;
use thiserror::Error;

use crate::exponents::{
    classify, conjugate_split, solve_p, Classification, CriterionLine, ExponentError, ExponentSolution,
    ExtendedRational, Rational,
};
use crate::field::{gauss_weight, gaussian_profile, Domain, FieldError, ScalarField, VectorField, WeightKind};
use crate::lorentz::registry::{self, ConstantsRegistry, RegistryError};
use crate::lorentz::LorentzError;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },
    #[error("snapshot times are not uniformly spaced")]
    NonUniformSpacing,
    #[error("exponents infeasible: {0}")]
    ExponentInfeasible(#[from] ExponentError),
    #[error("shift V is not positive at sample {0}")]
    NonPositiveShift(usize),
    #[error("Gronwall exponent requires q > 3, got {0}")]
    QOutOfRange(Rational),
    #[error("invalid monitor configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Lorentz(#[from] LorentzError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorConfig {
    pub theta: Rational,
    pub q: Rational,
    /// Off-line exponent supplied by the user; `None` derives `p` from the line.
    pub p: Option<Rational>,
    pub epsilon: f64,
    /// On the torus, use the weight `1` instead of the Gaussian.
    pub torus_weight: bool,
    pub c_tol: f64,
    pub gronwall_q: Rational,
    pub c_gronwall: f64,
    pub mu_gronwall: f64,
}

impl MonitorConfig {
    pub fn new(theta: Rational, q: Rational) -> Self {
        MonitorConfig {
            theta,
            q,
            p: None,
            epsilon: 0.1,
            torus_weight: true,
            c_tol: 50.0,
            gronwall_q: Rational::int(4),
            c_gronwall: 1.0,
            mu_gronwall: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), MonitorError> {
        self.solution()?;
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(MonitorError::InvalidConfig("epsilon must be positive".into()));
        }
        if self.epsilon * GRAD_MOD_COEFF >= 0.5 {
            return Err(MonitorError::InvalidConfig(format!(
                "epsilon = {} too large: {} ε must stay below the dissipation coefficient 1/2",
                self.epsilon, GRAD_MOD_COEFF
            )));
        }
        if !self.c_tol.is_finite() || self.c_tol < 0.0 {
            return Err(MonitorError::InvalidConfig("c_tol must be non-negative".into()));
        }
        if self.gronwall_q <= Rational::int(3) {
            return Err(MonitorError::QOutOfRange(self.gronwall_q.clone()));
        }
        if !(self.c_gronwall > 0.0 && self.mu_gronwall > 0.0) {
            return Err(MonitorError::InvalidConfig("c_gronwall and mu_gronwall must be positive".into()));
        }
        if let Some(p) = &self.p {
            if !p.is_positive() {
                return Err(MonitorError::InvalidConfig("p must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn line(&self) -> Result<CriterionLine, MonitorError> {
        Ok(CriterionLine::mixed_pv(self.theta.clone())?)
    }

    pub fn solution(&self) -> Result<ExponentSolution, MonitorError> {
        Ok(conjugate_split(&self.theta, &self.q)?)
    }

    /// `p` on the line through `(θ, q)`.
    pub fn derived_p(&self) -> Result<Rational, MonitorError> {
        match solve_p(&self.line()?, &ExtendedRational::Finite(self.q.clone()))? {
            ExtendedRational::Finite(p) => Ok(p),
            ExtendedRational::PositiveInfinity => {
                Err(ExponentError::QOutOfRange(ExtendedRational::Finite(self.q.clone()), "p is infinite".into()).into())
            }
        }
    }

    /// The exponent used for the time integral: the user's `p` or the derived one.
    pub fn effective_p(&self) -> Result<Rational, MonitorError> {
        match &self.p {
            Some(p) => Ok(p.clone()),
            None => self.derived_p(),
        }
    }

    pub fn classification(&self) -> Result<Classification, MonitorError> {
        let p = self.effective_p()?;
        Ok(classify(&self.line()?, &ExtendedRational::Finite(p), &ExtendedRational::Finite(self.q.clone()))?)
    }

    pub fn weight_kind(&self, domain: Domain) -> WeightKind {
        match domain {
            Domain::Torus if self.torus_weight => WeightKind::Unit,
            _ => WeightKind::Gaussian,
        }
    }
}

/// Coefficient in front of `‖∇|v|²‖₂²` in the expanded bound on `‖∇V²‖₂²`.
pub const GRAD_MOD_COEFF: f64 = 4.0;

/// Calibrated constants read from the registry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorConstants {
    pub holder: f64,
    pub riesz: f64,
    pub sobolev: f64,
    pub interp: f64,
}

impl MonitorConstants {
    pub fn from_registry(reg: &ConstantsRegistry) -> Result<Self, MonitorError> {
        Ok(MonitorConstants {
            holder: reg.require(registry::C_HOLDER)?,
            riesz: reg.require(registry::C_RIESZ)?,
            sobolev: reg.require(registry::C_SOBOLEV)?,
            interp: reg.require(registry::C_INTERP)?,
        })
    }

    /// Unit constants; useful where a link is exact.
    pub fn unit() -> Self {
        MonitorConstants { holder: 1.0, riesz: 1.0, sobolev: 1.0, interp: 1.0 }
    }
}

/// The weight `w` entering `V = w + |v|`: `1` on the torus with
/// `torus_weight`, the centred Gaussian otherwise.
pub fn weight<T: Real>(v: &VectorField<T>, kind: WeightKind) -> ScalarField<T> {
    match kind {
        WeightKind::Unit => ScalarField::constant(*v.grid(), T::one()),
        WeightKind::Gaussian => {
            gauss_weight(v.grid(), WeightKind::Gaussian).unwrap_or_else(|_| gaussian_profile(v.grid()))
        }
    }
}

/// `V = w + |v|`.
pub fn v_shift<T: Real>(v: &VectorField<T>, kind: WeightKind) -> ScalarField<T> {
    weight(v, kind).zip_map(&v.magnitude(), |w, m| w + m).expect("same grid")
}

/// `π / V^θ`; returns `π` itself when `θ = 0`.
pub fn tilde_pi<T: Real>(
    pi: &ScalarField<T>,
    shift: &ScalarField<T>,
    theta: &Rational,
) -> Result<ScalarField<T>, MonitorError> {
    pi.same_grid(shift)?;
    if let Some(i) = shift.values().iter().position(|&s| s.is_nan() || s <= T::zero()) {
        return Err(MonitorError::NonPositiveShift(i));
    }
    if theta.is_zero() {
        return Ok(pi.clone());
    }
    if *theta == Rational::one() {
        return Ok(pi.zip_map(shift, |a, s| a / s)?);
    }
    let th = T::lit(theta.to_f64());
    Ok(pi.zip_map(shift, |a, s| a / s.powf(th))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid3;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn shift_examples() {
        let g = Grid3::torus_2pi(8).unwrap();
        let z = VectorField::<f64>::zeros(g);
        assert!(v_shift(&z, WeightKind::Unit).values().iter().all(|&x| x == 1.0));
        let wg = Grid3::new(8, 10.0, Domain::WindowedR3).unwrap();
        let w = v_shift(&VectorField::<f64>::zeros(wg), WeightKind::Gaussian);
        assert_eq!(w, gaussian_profile(&wg));
        let v = VectorField::<f64>::from_fn(g, |_, _, _| [3.0, 0.0, 0.0]);
        assert!(v_shift(&v, WeightKind::Unit).values().iter().all(|&x| x == 4.0));
    }

    #[test]
    fn tilde_pi_examples() {
        let g = Grid3::torus_2pi(8).unwrap();
        let pi = ScalarField::constant(g, 6.0f64);
        let two = ScalarField::constant(g, 2.0f64);
        assert_eq!(tilde_pi(&pi, &two, &Rational::zero()).unwrap(), pi);
        assert!(tilde_pi(&pi, &two, &Rational::one()).unwrap().values().iter().all(|&x| x == 3.0));
        let p2 = ScalarField::constant(g, 2.0f64);
        let four = ScalarField::constant(g, 4.0f64);
        let t = tilde_pi(&p2, &four, &r(1, 2)).unwrap();
        assert!(t.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let bad = ScalarField::zeros(g);
        assert!(matches!(tilde_pi(&pi, &bad, &r(1, 2)), Err(MonitorError::NonPositiveShift(0))));
    }

    #[test]
    fn config_checks() {
        let c = MonitorConfig::new(Rational::one(), Rational::int(4));
        c.validate().unwrap();
        assert_eq!(c.derived_p().unwrap(), Rational::int(8));
        assert_eq!(c.classification().unwrap(), Classification::Strong);
        let mut off = c.clone();
        off.p = Some(Rational::int(20));
        assert_eq!(off.classification().unwrap(), Classification::Mild);
        let infeasible = MonitorConfig::new(Rational::zero(), r(3, 2));
        assert!(matches!(infeasible.validate(), Err(MonitorError::ExponentInfeasible(_))));
        let mut big_eps = c.clone();
        big_eps.epsilon = 0.2;
        assert!(big_eps.validate().is_err());
        let mut gq = c;
        gq.gronwall_q = Rational::int(3);
        assert!(matches!(gq.validate(), Err(MonitorError::QOutOfRange(_))));
    }
}
