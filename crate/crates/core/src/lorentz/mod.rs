//! Lebesgue, Lorentz `L^{p,q}` and weak-`L^p` quasi-norms of sampled fields,
//! computed in closed form from the step distribution function, plus the
//! defect harnesses used to probe the classical Lorentz-space inequalities.

mod distribution;
pub mod registry;

pub use distribution::DistributionProfile;
pub use registry::{ConstantsRegistry, RegistryError};

use serde::Serialize;
use thiserror::Error;

use crate::exponents::{ExponentError, ExtendedRational, Rational};
use crate::field::{Domain, FieldError, ScalarField, Spectral, VectorField};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LorentzError {
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("exponent relation violated: {0}")]
    ExponentRelationViolated(String),
    #[error("field is constant; the gradient vanishes")]
    ConstantField,
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormMethod {
    ClosedFormSum,
    SupFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorentzNormResult<T> {
    pub p: Rational,
    pub q: ExtendedRational,
    pub value: T,
    pub method: NormMethod,
}

fn real<T: Real>(r: &Rational) -> T {
    T::lit(r.to_f64())
}

fn check_p(p: &Rational) -> Result<(), LorentzError> {
    if p < &Rational::one() {
        return Err(LorentzError::ExponentOutOfRange(format!("p = {p} must be >= 1")));
    }
    Ok(())
}

pub fn distribution<T: Real>(f: &ScalarField<T>) -> DistributionProfile<T> {
    DistributionProfile::from_field(f)
}

/// `‖f‖_{L^{p,q}}` for finite `q`.
pub fn lorentz_norm<T: Real>(
    f: &ScalarField<T>,
    p: &Rational,
    q: &Rational,
) -> Result<LorentzNormResult<T>, LorentzError> {
    check_p(p)?;
    if q < &Rational::one() {
        return Err(LorentzError::ExponentOutOfRange(format!("q = {q} must be >= 1")));
    }
    let value = distribution(f).lorentz(real(p), real(q));
    Ok(LorentzNormResult { p: p.clone(), q: q.clone().into(), value, method: NormMethod::ClosedFormSum })
}

/// `‖f‖_{L^{p,∞}} = sup_τ τ |{|f| > τ}|^{1/p}`.
pub fn weak_norm<T: Real>(f: &ScalarField<T>, p: &Rational) -> Result<LorentzNormResult<T>, LorentzError> {
    check_p(p)?;
    let value = distribution(f).weak(real(p));
    Ok(LorentzNormResult { p: p.clone(), q: ExtendedRational::PositiveInfinity, value, method: NormMethod::SupFormula })
}

/// Dispatches to [`lorentz_norm`] or [`weak_norm`].
pub fn lorentz_quasi_norm<T: Real>(
    f: &ScalarField<T>,
    p: &Rational,
    q: &ExtendedRational,
) -> Result<LorentzNormResult<T>, LorentzError> {
    match q {
        ExtendedRational::Finite(q) => lorentz_norm(f, p, q),
        ExtendedRational::PositiveInfinity => weak_norm(f, p),
    }
}

/// Same as [`lorentz_quasi_norm`] but reusing a precomputed profile.
pub fn profile_norm<T: Real>(
    d: &DistributionProfile<T>,
    p: &Rational,
    q: &ExtendedRational,
) -> Result<T, LorentzError> {
    check_p(p)?;
    Ok(match q {
        ExtendedRational::Finite(q) => {
            if q < &Rational::one() {
                return Err(LorentzError::ExponentOutOfRange(format!("q = {q} must be >= 1")));
            }
            d.lorentz(real(p), real(q))
        }
        ExtendedRational::PositiveInfinity => d.weak(real(p)),
    })
}

/// `(Σ |f|^p · cell_volume)^{1/p}`, summed directly over cells.
pub fn lebesgue_norm<T: Real>(f: &ScalarField<T>, p: &Rational) -> Result<T, LorentzError> {
    check_p(p)?;
    let pf: T = real(p);
    let s: T = f.values().iter().map(|v| v.abs().powf(pf)).sum();
    Ok((s * T::lit(f.grid().cell_volume())).powf(T::one() / pf))
}

/// `‖f‖_{p,q₂} / ((q₁/p)^{1/q₁ − 1/q₂} ‖f‖_{p,q₁})`; at most one for every `f`.
pub fn nesting_defect<T: Real>(
    f: &ScalarField<T>,
    p: &Rational,
    q1: &Rational,
    q2: &ExtendedRational,
) -> Result<T, LorentzError> {
    if q1 < &Rational::one() || &ExtendedRational::Finite(q1.clone()) >= q2 {
        return Err(LorentzError::ExponentOutOfRange(format!("need 1 <= q1 < q2, got q1 = {q1}, q2 = {q2}")));
    }
    let d = distribution(f);
    if d.is_zero() {
        return Ok(T::zero());
    }
    let lower = profile_norm(&d, p, &ExtendedRational::Finite(q1.clone()))?;
    let upper = profile_norm(&d, p, q2)?;
    let expo = q1.recip()? - q2.recip()?;
    let constant = T::lit(q1.checked_div(p)?.to_f64()).powf(real(&expo));
    Ok(upper / (constant * lower))
}

/// Lorentz exponents of one factor in a Hölder product.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzIndex {
    pub p: Rational,
    pub q: ExtendedRational,
}

impl LorentzIndex {
    pub fn new(p: Rational, q: ExtendedRational) -> Self {
        LorentzIndex { p, q }
    }
}

/// `‖fg‖_{r,s} / (‖f‖_{r₁,s₁} ‖g‖_{r₂,s₂})` with `1/r = 1/r₁ + 1/r₂`,
/// `1/s = 1/s₁ + 1/s₂` checked exactly.
pub fn holder_defect<T: Real>(
    f: &ScalarField<T>,
    g: &ScalarField<T>,
    product: &LorentzIndex,
    first: &LorentzIndex,
    second: &LorentzIndex,
) -> Result<T, LorentzError> {
    if product.p.recip()? != first.p.recip()? + second.p.recip()? {
        return Err(LorentzError::ExponentRelationViolated(format!(
            "1/{} != 1/{} + 1/{}",
            product.p, first.p, second.p
        )));
    }
    if product.q.recip()? != first.q.recip()? + second.q.recip()? {
        return Err(LorentzError::ExponentRelationViolated(format!(
            "1/{} != 1/{} + 1/{}",
            product.q, first.q, second.q
        )));
    }
    let fg = f.zip_map(g, |a, b| a * b)?;
    let top = profile_norm(&distribution(&fg), &product.p, &product.q)?;
    if top.is_zero() {
        return Ok(T::zero());
    }
    let nf = profile_norm(&distribution(f), &first.p, &first.q)?;
    let ng = profile_norm(&distribution(g), &second.p, &second.q)?;
    Ok(top / (nf * ng))
}

/// `‖f − f̄‖_{L^{3p/(3−p), p}} / ‖∇f‖_{L^p}`; the mean is removed on the torus only.
pub fn sobolev_defect<T: Real>(spectral: &Spectral<T>, f: &ScalarField<T>, p: &Rational) -> Result<T, LorentzError> {
    let three = Rational::int(3);
    if p < &Rational::one() || p >= &three {
        return Err(LorentzError::ExponentOutOfRange(format!("p = {p} must lie in [1, 3)")));
    }
    let target = (&three * p).checked_div(&(&three - p))?;
    let centred = match f.grid().domain() {
        Domain::Torus => {
            let m = f.mean();
            f.map(|v| v - m)
        }
        Domain::WindowedR3 => f.clone(),
    };
    let grad = spectral.gradient(f)?.magnitude();
    let scale = T::one().max(f.max_abs()) * T::lit(1e-12);
    if grad.max_abs() <= scale {
        return Err(LorentzError::ConstantField);
    }
    let top = lorentz_norm(&centred, &target, p)?.value;
    let bottom = lebesgue_norm(&grad, p)?;
    Ok(top / bottom)
}

/// `‖R_j f‖_{p,q} / ‖f‖_{p,q}`.
pub fn riesz_defect<T: Real>(
    spectral: &Spectral<T>,
    f: &ScalarField<T>,
    axis: usize,
    index: &LorentzIndex,
) -> Result<T, LorentzError> {
    let rf = spectral.riesz_transform(axis, f)?;
    let bottom = profile_norm(&distribution(f), &index.p, &index.q)?;
    if bottom.is_zero() {
        return Ok(T::zero());
    }
    Ok(profile_norm(&distribution(&rf), &index.p, &index.q)? / bottom)
}

/// `‖Σᵢⱼ RᵢRⱼ(vᵢvⱼ)‖_{p,q} / ‖|v|²‖_{p,q}`: the Riesz step that bounds the
/// pressure by the kinetic density.
pub fn pressure_riesz_defect<T: Real>(
    spectral: &Spectral<T>,
    v: &VectorField<T>,
    index: &LorentzIndex,
) -> Result<T, LorentzError> {
    let pi = spectral.pressure_from_velocity(v)?;
    let bottom = profile_norm(&distribution(&v.magnitude_sq()), &index.p, &index.q)?;
    if bottom.is_zero() {
        return Ok(T::zero());
    }
    Ok(profile_norm(&distribution(&pi), &index.p, &index.q)? / bottom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid3;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn indicator(measure_cells: usize) -> ScalarField<f64> {
        let g = Grid3::new(8, 1.0, Domain::Torus).unwrap();
        let vals = (0..g.len()).map(|i| if i < measure_cells { 1.0 } else { 0.0 }).collect();
        ScalarField::new(g, vals).unwrap()
    }

    #[test]
    fn indicator_closed_forms() {
        let f = indicator(128);
        let m: f64 = 0.25;
        for (p, q) in [(r(1, 1), r(1, 1)), (r(2, 1), r(3, 1)), (r(3, 2), r(5, 2)), (r(4, 1), r(2, 1))] {
            let (pf, qf) = (p.to_f64(), q.to_f64());
            let expected = (pf / qf).powf(1.0 / qf) * m.powf(1.0 / pf);
            let got = lorentz_norm(&f, &p, &q).unwrap().value;
            assert!((got - expected).abs() <= 1e-12 * expected, "p={p} q={q}");
            let weak = weak_norm(&f, &p).unwrap().value;
            assert!((weak - m.powf(1.0 / pf)).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_norms() {
        let g = Grid3::new(8, 1.0, Domain::Torus).unwrap();
        let f = ScalarField::constant(g, 2.5f64);
        assert!((weak_norm(&f, &r(3, 1)).unwrap().value - 2.5).abs() < 1e-14);
        assert!((lebesgue_norm(&f, &r(3, 1)).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn lebesgue_of_sine() {
        let l = 3.0f64;
        let g = Grid3::new(16, l, Domain::Torus).unwrap();
        let f = ScalarField::<f64>::from_fn(g, |x, _, _| (2.0 * std::f64::consts::PI * x / l).sin());
        let got = lebesgue_norm(&f, &r(2, 1)).unwrap();
        assert!((got - (l.powi(3) / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_norms() {
        let f = indicator(0);
        assert_eq!(lorentz_norm(&f, &r(2, 1), &r(3, 1)).unwrap().value, 0.0);
        assert_eq!(weak_norm(&f, &r(2, 1)).unwrap().value, 0.0);
        assert_eq!(nesting_defect(&f, &r(2, 1), &r(2, 1), &ExtendedRational::PositiveInfinity).unwrap(), 0.0);
    }

    #[test]
    fn exponent_range_errors() {
        let f = indicator(10);
        assert!(matches!(lorentz_norm(&f, &r(1, 2), &r(2, 1)), Err(LorentzError::ExponentOutOfRange(_))));
        assert!(matches!(weak_norm(&f, &r(0, 1)), Err(LorentzError::ExponentOutOfRange(_))));
        assert!(nesting_defect(&f, &r(2, 1), &r(3, 1), &ExtendedRational::Finite(r(2, 1))).is_err());
    }

    #[test]
    fn nesting_indicator_is_sharp() {
        // For an indicator the q₂ = ∞ bound is attained: the defect is exactly 1.
        let f = indicator(100);
        let d = nesting_defect(&f, &r(2, 1), &r(2, 1), &ExtendedRational::PositiveInfinity).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        // Finite q₂: defect (q₁/q₂)^{1/q₂} < 1.
        let d = nesting_defect(&f, &r(2, 1), &r(2, 1), &ExtendedRational::Finite(r(4, 1))).unwrap();
        assert!((d - 0.5f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn holder_disjoint_support_is_zero() {
        let g = Grid3::new(8, 1.0, Domain::Torus).unwrap();
        let f = ScalarField::<f64>::from_fn(g, |x, _, _| if x < 0.5 { 1.0 } else { 0.0 });
        let h = ScalarField::<f64>::from_fn(g, |x, _, _| if x < 0.5 { 0.0 } else { 2.0 });
        let idx = |p, q| LorentzIndex::new(r(p, 1), ExtendedRational::Finite(r(q, 1)));
        let d = holder_defect(&f, &h, &idx(1, 1), &idx(2, 2), &idx(2, 2)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn holder_rejects_bad_relation() {
        let f = indicator(10);
        let idx = |p, q| LorentzIndex::new(r(p, 1), ExtendedRational::Finite(r(q, 1)));
        let e = holder_defect(&f, &f, &idx(1, 1), &idx(2, 2), &idx(3, 2));
        assert!(matches!(e, Err(LorentzError::ExponentRelationViolated(_))));
    }

    #[test]
    fn holder_indicator_closed_form() {
        // f = g = 1_A: ‖1_A‖_{1,1} / (‖1_A‖_{2,2})² = m / m = 1.
        let f = indicator(200);
        let idx = |p, q| LorentzIndex::new(r(p, 1), ExtendedRational::Finite(r(q, 1)));
        let d = holder_defect(&f, &f, &idx(1, 1), &idx(2, 2), &idx(2, 2)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_constant_field_is_an_error() {
        let g = Grid3::torus_2pi(8).unwrap();
        let s = Spectral::<f64>::new(g);
        let f = ScalarField::constant(g, 1.0);
        assert_eq!(sobolev_defect(&s, &f, &r(2, 1)), Err(LorentzError::ConstantField));
        assert!(sobolev_defect(&s, &f, &r(3, 1)).is_err());
    }
}
