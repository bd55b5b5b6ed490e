use serde::Serialize;

use super::{solve_p, CriterionLine, ExponentError, ExtendedRational, Rational};

/// One Hölder leg of the split. The `π^{2−β}` leg disappears when `β = 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Leg {
    Used(Rational),
    Unused,
}

impl Leg {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            Leg::Used(r) => Some(r),
            Leg::Unused => None,
        }
    }
}

/// An admissible point on the mixed pressure-velocity line with all
/// auxiliary exponents of the estimate chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentSolution {
    pub theta: Rational,
    pub beta: Rational,
    pub p: Rational,
    pub q: Rational,
    /// `1/r₁`; zero exactly when the leg is unused.
    pub inv_r1: Rational,
    pub inv_r2: Rational,
    pub r1: Leg,
    pub r2: Rational,
    pub delta1: Rational,
    pub delta2: Rational,
}

/// `3/(2 − θ)`: the mixed line needs `q` strictly above this.
pub fn mixed_pv_q_floor(theta: &Rational) -> Result<Rational, ExponentError> {
    Rational::int(3).checked_div(&(Rational::int(2) - theta))
}

/// `β = 2/(2 − θ)` for `θ ∈ [0, 1]`.
pub fn beta_of_theta(theta: &Rational) -> Result<Rational, ExponentError> {
    if theta.is_negative() || theta > &Rational::one() {
        return Err(ExponentError::ThetaOutOfRange(theta.clone(), "[0, 1]"));
    }
    Rational::int(2).checked_div(&(Rational::int(2) - theta))
}

/// The explicit split `1/r₁ = (2−β)/2·(1 − β/q)`, `1/r₂ = β/2·(1 − β/q)`,
/// which gives `δ₁ = δ₂ = 3β/(2q)`.
pub fn conjugate_split(theta: &Rational, q: &Rational) -> Result<ExponentSolution, ExponentError> {
    let beta = beta_of_theta(theta)?;
    let floor = mixed_pv_q_floor(theta)?;
    if q <= &floor {
        return Err(ExponentError::QOutOfRange(ExtendedRational::Finite(q.clone()), format!("need q > {floor}")));
    }
    let line = CriterionLine::mixed_pv(theta.clone())?;
    let p = match solve_p(&line, &ExtendedRational::Finite(q.clone()))? {
        ExtendedRational::Finite(p) => p,
        ExtendedRational::PositiveInfinity => unreachable!("mixed line never yields p = inf"),
    };
    let two = Rational::int(2);
    let slack = Rational::one() - beta.checked_div(q)?;
    let inv_r1 = (&two - &beta).checked_div(&two)? * &slack;
    let inv_r2 = beta.checked_div(&two)? * &slack;
    let r1 = if inv_r1.is_zero() { Leg::Unused } else { Leg::Used(inv_r1.recip()?) };
    let r2 = inv_r2.recip()?;
    let delta = (Rational::int(3) * &beta).checked_div(&(Rational::int(2) * q))?;
    let sol = ExponentSolution {
        theta: theta.clone(),
        beta,
        p,
        q: q.clone(),
        inv_r1,
        inv_r2,
        r1,
        r2,
        delta1: delta.clone(),
        delta2: delta,
    };
    sol.validate()?;
    Ok(sol)
}

/// `2(2 − δ₁(2−β) − δ₂β)/(2β) + 3/q`, which must equal `2 − θ`.
pub fn closing_identity(sol: &ExponentSolution) -> Result<Rational, ExponentError> {
    let two = Rational::int(2);
    let weighted = sol.weighted_delta();
    let expected = (Rational::int(3) * &sol.beta).checked_div(&sol.q)?;
    if weighted != expected {
        return Err(ExponentError::RelationViolated(format!(
            "delta1(2-beta) + delta2 beta = {weighted}, expected 3 beta/q = {expected}"
        )));
    }
    let lead = (&two * (&two - &weighted)).checked_div(&(&two * &sol.beta))?;
    Ok(lead + Rational::int(3).checked_div(&sol.q)?)
}

impl ExponentSolution {
    /// `δ₁(2 − β) + δ₂β`.
    pub fn weighted_delta(&self) -> Rational {
        &self.delta1 * (Rational::int(2) - &self.beta) + &self.delta2 * &self.beta
    }

    /// Time exponent produced by the Young absorption step,
    /// `2β/(2 − δ₁(2−β) − δ₂β)`.
    pub fn absorption_exponent(&self) -> Result<Rational, ExponentError> {
        (Rational::int(2) * &self.beta).checked_div(&(Rational::int(2) - self.weighted_delta()))
    }

    /// Lorentz exponent `(2 − β) r₁` of the pressure leg, if used.
    pub fn target1(&self) -> Option<Rational> {
        self.r1.value().map(|r1| (Rational::int(2) - &self.beta) * r1)
    }

    /// Lorentz exponent `β r₂` of the velocity leg.
    pub fn target2(&self) -> Rational {
        &self.beta * &self.r2
    }

    /// Checks every structural relation exactly.
    pub fn validate(&self) -> Result<(), ExponentError> {
        let two = Rational::int(2);
        let one = Rational::one();
        let fail = |m: String| Err(ExponentError::RelationViolated(m));
        if self.beta != beta_of_theta(&self.theta)? {
            return fail(format!("beta = {} is not 2/(2 - theta)", self.beta));
        }
        if &two + &self.theta * &self.beta != &two * &self.beta {
            return fail("2 + theta beta != 2 beta".into());
        }
        let holder = self.beta.checked_div(&self.q)? + &self.inv_r1 + &self.inv_r2;
        if holder != one {
            return fail(format!("beta/q + 1/r1 + 1/r2 = {holder}"));
        }
        let interp = |d: &Rational| (&one - d).checked_div(&two).unwrap() + d.checked_div(&Rational::int(6)).unwrap();
        let two_minus_beta = &two - &self.beta;
        match &self.r1 {
            Leg::Used(r1) => {
                if &self.inv_r1 * r1 != one {
                    return fail("r1 is not the reciprocal of 1/r1".into());
                }
                if self.inv_r1.checked_div(&two_minus_beta)? != interp(&self.delta1) {
                    return fail("1/((2-beta) r1) does not match delta1".into());
                }
            }
            Leg::Unused => {
                if !two_minus_beta.is_zero() || !self.inv_r1.is_zero() {
                    return fail("r1 marked unused while beta != 2".into());
                }
            }
        }
        if &self.inv_r2 * &self.r2 != one {
            return fail("r2 is not the reciprocal of 1/r2".into());
        }
        if self.inv_r2.checked_div(&self.beta)? != interp(&self.delta2) {
            return fail("1/(beta r2) does not match delta2".into());
        }
        for d in [&self.delta1, &self.delta2] {
            if !d.is_positive() || d >= &one {
                return fail(format!("delta = {d} outside (0, 1)"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_of_theta(&Rational::zero()).unwrap(), Rational::one());
        assert_eq!(beta_of_theta(&Rational::one()).unwrap(), Rational::int(2));
        assert_eq!(beta_of_theta(&r(1, 2)).unwrap(), r(4, 3));
        assert!(matches!(beta_of_theta(&r(101, 100)), Err(ExponentError::ThetaOutOfRange(..))));
    }

    #[test]
    fn split_theta_one_q_four() {
        let s = conjugate_split(&Rational::one(), &Rational::int(4)).unwrap();
        assert_eq!(s.beta, Rational::int(2));
        assert_eq!(s.delta1, r(3, 4));
        assert_eq!(s.delta2, r(3, 4));
        assert_eq!(s.r1, Leg::Unused);
        // β/q = 1/2 so the remaining leg carries 1/r₂ = 1/2 and 1/(β r₂) = 1/4.
        assert_eq!(s.inv_r2, r(1, 2));
        assert_eq!(s.inv_r2.checked_div(&s.beta).unwrap(), r(1, 4));
        assert_eq!(s.p, Rational::int(8));
        assert_eq!(s.target2(), Rational::int(4));
    }

    #[test]
    fn split_theta_zero_q_three() {
        let s = conjugate_split(&Rational::zero(), &Rational::int(3)).unwrap();
        assert_eq!(s.beta, Rational::one());
        assert_eq!(s.delta1, r(1, 2));
        assert_eq!(s.inv_r1, r(1, 3));
        assert_eq!(s.inv_r2, r(1, 3));
        assert_eq!(s.r1, Leg::Used(Rational::int(3)));
    }

    #[test]
    fn split_rejects_q_at_floor() {
        assert!(matches!(conjugate_split(&Rational::zero(), &r(3, 2)), Err(ExponentError::QOutOfRange(..))));
    }

    #[test]
    fn closing_identity_examples() {
        let cases = [((1, 1), 4, r(1, 1)), ((0, 1), 3, r(2, 1)), ((1, 2), 4, r(3, 2))];
        for ((tn, td), q, expected) in cases {
            let s = conjugate_split(&r(tn, td), &Rational::int(q)).unwrap();
            assert_eq!(closing_identity(&s).unwrap(), expected);
        }
    }

    #[test]
    fn absorption_exponent_is_p() {
        let s = conjugate_split(&Rational::one(), &Rational::int(4)).unwrap();
        assert_eq!(s.absorption_exponent().unwrap(), Rational::int(8));
    }

    #[test]
    fn tampered_solution_fails_validation() {
        let mut s = conjugate_split(&r(1, 2), &Rational::int(4)).unwrap();
        s.delta2 = r(1, 3);
        assert!(s.validate().is_err());
        assert!(closing_identity(&s).is_err());
    }
}
