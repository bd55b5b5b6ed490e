use serde::Serialize;

use super::{ExponentError, ExtendedRational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CriterionKind {
    /// `2/p + n/q = 2 − θ`, `0 ≤ θ ≤ 1`, `p, q` finite.
    MixedPV,
    /// `2/p + n/q = 1`.
    Lps,
    /// `2/p + 3/q = 5/2 − 3θ/2`, `1 ≤ θ ≤ 5/3`, `6/(5 − 3θ) < q ≤ ∞`.
    Zhou,
    /// `2/p + n/q = 2` (pressure alone, whole space).
    BerselliGaldi,
    /// `2/p + n/q = 1 + n/p` (pressure alone, `p < n`).
    Berselli99,
    /// `2/γ + n/γ = 2 − θ` with `p = q = γ`; the truncation-method threshold.
    Frac98,
    /// `2/p + n/q = 1` in weak-in-space Lorentz classes.
    Sohr,
}

/// A scaling line `a/p + b/q = rhs` in the `(1/p, 1/q)` plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionLine {
    kind: CriterionKind,
    n: u32,
    theta: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Strong,
    Mild,
    Invalid,
}

impl CriterionLine {
    pub fn new(kind: CriterionKind, n: u32, theta: Option<Rational>) -> Result<Self, ExponentError> {
        if n < 3 {
            return Err(ExponentError::DimensionOutOfRange(n));
        }
        let theta = match kind {
            CriterionKind::MixedPV | CriterionKind::Frac98 => {
                let t = theta.unwrap_or_else(Rational::zero);
                if t.is_negative() || t > Rational::one() {
                    return Err(ExponentError::ThetaOutOfRange(t, "[0, 1]"));
                }
                Some(t)
            }
            CriterionKind::Zhou => {
                let t = theta.unwrap_or_else(Rational::one);
                let upper = Rational::new(5, 3)?;
                if t < Rational::one() || t > upper {
                    return Err(ExponentError::ThetaOutOfRange(t, "[1, 5/3]"));
                }
                Some(t)
            }
            _ => None,
        };
        Ok(CriterionLine { kind, n, theta })
    }

    pub fn mixed_pv(theta: Rational) -> Result<Self, ExponentError> {
        CriterionLine::new(CriterionKind::MixedPV, 3, Some(theta))
    }

    pub fn kind(&self) -> CriterionKind {
        self.kind
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn theta(&self) -> Option<&Rational> {
        self.theta.as_ref()
    }

    /// Coefficients `(a, b, rhs)` of `a/p + b/q = rhs`.
    pub fn coefficients(&self) -> (Rational, Rational, Rational) {
        let n = Rational::int(self.n as i64);
        let two = Rational::int(2);
        let theta = self.theta.clone().unwrap_or_else(Rational::zero);
        match self.kind {
            CriterionKind::MixedPV | CriterionKind::Frac98 => (two.clone(), n, two - theta),
            CriterionKind::Lps | CriterionKind::Sohr => (two, n, Rational::one()),
            CriterionKind::Zhou => {
                let rhs = Rational::new(5, 2).unwrap() - Rational::new(3, 2).unwrap() * theta;
                (two, Rational::int(3), rhs)
            }
            CriterionKind::BerselliGaldi => (two.clone(), n, two),
            CriterionKind::Berselli99 => (two - &n, n, Rational::one()),
        }
    }

    /// `a/p + b/q − rhs`; zero on the line, negative below it.
    pub fn excess(&self, p: &ExtendedRational, q: &ExtendedRational) -> Result<Rational, ExponentError> {
        let (a, b, rhs) = self.coefficients();
        Ok(a * p.recip()? + b * q.recip()? - rhs)
    }
}

/// Solves the line for `p` given `q`.
pub fn solve_p(line: &CriterionLine, q: &ExtendedRational) -> Result<ExtendedRational, ExponentError> {
    let (a, b, rhs) = line.coefficients();
    if rhs.is_zero() {
        return Err(ExponentError::DegenerateLine);
    }
    if let ExtendedRational::Finite(qf) = q {
        if !qf.is_positive() {
            return Err(ExponentError::QOutOfRange(q.clone(), "q must be positive".into()));
        }
    }
    match line.kind {
        CriterionKind::MixedPV => {
            let qf =
                q.finite().ok_or_else(|| ExponentError::QOutOfRange(q.clone(), "p and q must be finite".into()))?;
            let floor = Rational::int(line.n as i64).checked_div(&rhs)?;
            if qf <= &floor {
                return Err(ExponentError::QOutOfRange(q.clone(), format!("need q > {floor}")));
            }
        }
        CriterionKind::Zhou => {
            let theta = line.theta.clone().unwrap_or_else(Rational::one);
            let floor = Rational::int(6).checked_div(&(Rational::int(5) - Rational::int(3) * theta))?;
            if q <= &ExtendedRational::Finite(floor.clone()) {
                return Err(ExponentError::QOutOfRange(q.clone(), format!("need q > {floor}")));
            }
        }
        _ => {}
    }
    let inv_p = (rhs - b * q.recip()?).checked_div(&a)?;
    if inv_p.is_negative() {
        return Err(ExponentError::QOutOfRange(q.clone(), "line forces p < 0".into()));
    }
    if inv_p.is_zero() {
        if line.kind == CriterionKind::MixedPV {
            return Err(ExponentError::QOutOfRange(q.clone(), "line forces p = inf".into()));
        }
        return Ok(ExtendedRational::PositiveInfinity);
    }
    Ok(ExtendedRational::Finite(inv_p.recip()?))
}

/// Strong on the line, mild strictly below it, invalid above.
pub fn classify(
    line: &CriterionLine,
    p: &ExtendedRational,
    q: &ExtendedRational,
) -> Result<Classification, ExponentError> {
    for (name, e) in [("p", p), ("q", q)] {
        if let ExtendedRational::Finite(x) = e {
            if !x.is_positive() {
                return Err(ExponentError::NonPositiveExponent(name.into()));
            }
        }
    }
    let excess = line.excess(p, q)?;
    Ok(if excess.is_zero() {
        Classification::Strong
    } else if excess.is_negative() {
        Classification::Mild
    } else {
        Classification::Invalid
    })
}

/// `μ(γ) = (1 − θ) N γ / (N − γ)` with `N = n + 2`.
///
/// At `θ = 1` the critical exponent `γ₁ = N/(2 − θ)` coincides with the pole
/// `γ = N`; there the value is the limit along the critical curve, which is `N`
/// for every `θ`.
pub fn mu_gamma(n: u32, theta: &Rational, gamma: &Rational) -> Result<Rational, ExponentError> {
    if n < 3 {
        return Err(ExponentError::DimensionOutOfRange(n));
    }
    if theta.is_negative() || theta > &Rational::one() {
        return Err(ExponentError::ThetaOutOfRange(theta.clone(), "[0, 1]"));
    }
    let big_n = Rational::int(n as i64 + 2);
    let one_minus = Rational::one() - theta;
    if one_minus.is_zero() && gamma == &big_n {
        return Ok(big_n);
    }
    if gamma <= &Rational::int(2) || gamma >= &big_n {
        return Err(ExponentError::GammaOutOfRange(Box::new([gamma.clone(), Rational::int(2), big_n])));
    }
    (one_minus * &big_n * gamma).checked_div(&(&big_n - gamma))
}

/// The extra constraint `p ≤ (n − 2) q / (n − q)` required when `2 ≤ q < n`.
pub fn q_constraint_check(n: u32, p: &Rational, q: &Rational) -> bool {
    let nn = Rational::int(n as i64);
    if q >= &nn {
        return true;
    }
    if q < &Rational::int(2) {
        return false;
    }
    let bound = (Rational::int(n as i64 - 2) * q).checked_div(&(nn - q)).expect("q < n");
    p <= &bound
}
