use proptest::prelude::*;
use pvlab::exponents::{ExtendedRational, Rational};
use pvlab::field::{Grid3, ScalarField, Spectral};
use pvlab::lorentz::{lebesgue_norm, lorentz_norm, nesting_defect, sobolev_defect, weak_norm};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

fn grid() -> Grid3 {
    Grid3::torus_2pi(8).unwrap()
}

fn field(vals: Vec<f64>) -> ScalarField<f64> {
    ScalarField::new(grid(), vals).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 512)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

const PS: [(i64, i64); 4] = [(1, 1), (3, 2), (2, 1), (4, 1)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn layer_cake_matches_direct_sum(vals in values()) {
        let f = field(vals);
        for (n, d) in PS {
            let p = r(n, d);
            let a = lorentz_norm(&f, &p, &p).unwrap().value;
            let b = lebesgue_norm(&f, &p).unwrap();
            prop_assert!(rel(a, b) < 1e-10, "p = {}: {} vs {}", p, a, b);
        }
    }

    #[test]
    fn weak_norm_is_below_lebesgue(vals in values()) {
        let f = field(vals);
        for (n, d) in PS {
            let p = r(n, d);
            prop_assert!(weak_norm(&f, &p).unwrap().value <= lebesgue_norm(&f, &p).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nesting_never_exceeds_one(vals in values(), pi in 0usize..4, q1i in 0usize..3) {
        let f = field(vals);
        let (n, d) = PS[pi];
        let p = r(n, d);
        let q1 = [r(1, 1), r(2, 1), r(3, 1)][q1i].clone();
        for q2 in [ExtendedRational::Finite(&q1 + &Rational::one()), ExtendedRational::Finite(r(8, 1)), ExtendedRational::PositiveInfinity] {
            if q2 <= ExtendedRational::Finite(q1.clone()) {
                continue;
            }
            let defect = nesting_defect(&f, &p, &q1, &q2).unwrap();
            prop_assert!(defect <= 1.0 + 1e-10, "p = {}, q1 = {}, q2 = {}: {}", p, q1, q2, defect);
        }
    }

    #[test]
    fn homogeneous_and_rearrangement_invariant(vals in values(), c in -5.0f64..5.0) {
        let f = field(vals.clone());
        let mut rev = vals;
        rev.reverse();
        let g = field(rev);
        let cf = f.scale(c);
        let (p, q) = (r(3, 2), r(3, 1));
        let base = lorentz_norm(&f, &p, &q).unwrap().value;
        prop_assert_eq!(base, lorentz_norm(&g, &p, &q).unwrap().value);
        prop_assert!((lorentz_norm(&cf, &p, &q).unwrap().value - c.abs() * base).abs() <= 1e-12 * base.max(1.0));
        prop_assert_eq!(weak_norm(&f, &p).unwrap().value, weak_norm(&g, &p).unwrap().value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_monotone_in_the_modulus(vals in values(), shrink in prop::collection::vec(0.0f64..=1.0, 512)) {
        let g = field(vals.clone());
        let f = field(vals.iter().zip(&shrink).map(|(v, s)| -v * s).collect());
        for (n, d) in PS {
            let p = r(n, d);
            prop_assert!(weak_norm(&f, &p).unwrap().value <= weak_norm(&g, &p).unwrap().value);
            prop_assert!(lebesgue_norm(&f, &p).unwrap() <= lebesgue_norm(&g, &p).unwrap() * (1.0 + 1e-12));
            for q in [r(1, 1), r(3, 1)] {
                prop_assert!(lorentz_norm(&f, &p, &q).unwrap().value <= lorentz_norm(&g, &p, &q).unwrap().value * (1.0 + 1e-12));
            }
        }
    }
}

/// Field supported on a 4×4×4 block of the 8³ grid with values in `[1/2, 2]`.
fn block_field(seed: u64) -> ScalarField<f64> {
    let g = grid();
    let mut s = seed.wrapping_mul(0x2545F4914F6CDD1D) | 1;
    let vals = (0..g.len())
        .map(|i| {
            let (x, y, z) = g.coords(i);
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let u = (s >> 11) as f64 / (1u64 << 53) as f64;
            if x < 4 && y < 4 && z < 4 {
                0.5 + 1.5 * u
            } else {
                0.0
            }
        })
        .collect();
    ScalarField::new(g, vals).unwrap()
}

/// `λ(t) = |{|f| > t}|` from sorted magnitudes.
fn lambda(sorted: &[f64], cell: f64, t: f64) -> f64 {
    (sorted.len() - sorted.partition_point(|&v| v <= t)) as f64 * cell
}

#[test]
fn brute_force_quadrature_oracle() {
    // ‖f‖_{p,q}^q = p ∫ t^{q−1} λ(t)^{q/p} dt = (p/q) ∫ λ(u^{1/q})^{q/p} du,
    // midpoint rule in u; the weak norm is sup t λ(t)^{1/p} over a fine grid.
    const N: usize = 1 << 22;
    for seed in 1..=3 {
        let f = block_field(seed);
        let cell = f.grid().cell_volume();
        let mut sorted: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        sorted.sort_by(f64::total_cmp);
        let top = *sorted.last().unwrap();
        for (pn, pd, qn, qd) in [(2, 1, 1, 1), (3, 2, 2, 1), (4, 1, 3, 1), (3, 1, 6, 1)] {
            let (p, q) = (r(pn, pd), r(qn, qd));
            let (pf, qf) = (p.to_f64(), q.to_f64());
            let umax = top.powf(qf);
            let du = umax / N as f64;
            let integral: f64 = (0..N)
                .map(|i| lambda(&sorted, cell, ((i as f64 + 0.5) * du).powf(1.0 / qf)).powf(qf / pf))
                .sum::<f64>()
                * du;
            let oracle = (pf / qf * integral).powf(1.0 / qf);
            let got = lorentz_norm(&f, &p, &q).unwrap().value;
            assert!(rel(got, oracle) < 1e-6, "seed {seed}, p = {p}, q = {q}: {got} vs {oracle}");

            let dt = top / N as f64;
            let weak_oracle = (0..N).map(|i| {
                let t = i as f64 * dt;
                t * lambda(&sorted, cell, t).powf(1.0 / pf)
            });
            let weak_oracle = weak_oracle.fold(0.0, f64::max);
            let weak = weak_norm(&f, &p).unwrap().value;
            assert!(
                weak >= weak_oracle && rel(weak, weak_oracle) < 1e-6,
                "seed {seed}, p = {p}: {weak} vs {weak_oracle}"
            );
        }
    }
}

#[test]
fn sobolev_defect_falls_with_frequency() {
    // Every sin(mx) has the same distribution up to sampling, while ‖∇f‖₂ grows like m.
    let g = Grid3::torus_2pi(32).unwrap();
    let sp = Spectral::<f64>::new(g);
    let defects: Vec<f64> = (1..=4)
        .map(|m| sobolev_defect(&sp, &ScalarField::from_fn(g, |x, _, _| (m as f64 * x).sin()), &r(2, 1)).unwrap())
        .collect();
    for (m, w) in defects.windows(2).enumerate() {
        assert!(w[1] < w[0]);
        let expected = (m + 1) as f64 / (m + 2) as f64;
        assert!((w[1] / w[0] - expected).abs() < 0.05 * expected, "{defects:?}");
    }
}
