use proptest::prelude::*;
use pvlab::exponents::{
    closing_identity, conjugate_split, mixed_pv_q_floor, mu_gamma, solve_p, CriterionLine, ExponentError,
    ExtendedRational, Leg, Rational,
};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

prop_compose! {
    fn admissible()(b in 1i64..=24, a_frac in 0.0f64..=1.0, num in 1i64..400, den in 1i64..=20)
        -> (Rational, Rational)
    {
        let a = (a_frac * b as f64).round() as i64;
        let theta = r(a, b);
        let floor = mixed_pv_q_floor(&theta).unwrap();
        (theta, floor + r(num, den))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn split_identities_are_exact((theta, q) in admissible()) {
        let s = conjugate_split(&theta, &q).unwrap();
        let two = Rational::int(2);
        prop_assert_eq!(&s.beta, &two.checked_div(&(&two - &theta)).unwrap());
        // Hölder exponents close: 1/r₁ + 1/r₂ + β/q = 1.
        prop_assert_eq!(&s.inv_r1 + &s.inv_r2 + s.beta.checked_div(&q).unwrap(), Rational::one());
        prop_assert_eq!(s.weighted_delta(), (Rational::int(3) * &s.beta).checked_div(&q).unwrap());
        prop_assert_eq!(&s.delta1 * (&two - &s.beta) + &s.delta2 * &s.beta, s.weighted_delta());
        prop_assert_eq!(closing_identity(&s).unwrap(), &two - &theta);
        // Each δ is the interpolation exponent of its Lorentz target.
        let delta_of = |t: &Rational| r(3, 2) - Rational::int(3).checked_div(t).unwrap();
        prop_assert_eq!(&s.delta2, &delta_of(&s.target2()));
        match (&s.r1, s.target1()) {
            (Leg::Used(_), Some(t1)) => prop_assert_eq!(&s.delta1, &delta_of(&t1)),
            (Leg::Unused, None) => prop_assert_eq!(&theta, &Rational::one()),
            other => prop_assert!(false, "inconsistent leg {:?}", other),
        }
        let line = CriterionLine::mixed_pv(theta.clone()).unwrap();
        let p = solve_p(&line, &ExtendedRational::Finite(q.clone())).unwrap();
        prop_assert_eq!(ExtendedRational::Finite(s.absorption_exponent().unwrap()), p);
    }

    #[test]
    fn q_at_or_below_the_floor_is_rejected(b in 1i64..=12, a_frac in 0.0f64..=1.0, num in 0i64..50, den in 1i64..=10) {
        let a = (a_frac * b as f64).round() as i64;
        let theta = r(a, b);
        let q = mixed_pv_q_floor(&theta).unwrap() - r(num, den);
        prop_assert!(matches!(conjugate_split(&theta, &q), Err(ExponentError::QOutOfRange(..))));
    }
}

#[test]
fn mu_at_the_critical_exponent_is_n_plus_two() {
    for n in [3u32, 4, 5] {
        let big_n = Rational::int(n as i64 + 2);
        for theta in [Rational::zero(), r(1, 2), Rational::one()] {
            let gamma = big_n.checked_div(&(Rational::int(2) - &theta)).unwrap();
            assert_eq!(mu_gamma(n, &theta, &gamma).unwrap(), big_n, "n = {n}, theta = {theta}");
        }
    }
}
