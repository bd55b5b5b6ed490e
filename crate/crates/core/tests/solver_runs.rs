use std::f64::consts::PI;

use pvlab::field::{Grid3, Spectral, VectorField};
use pvlab::io::{write_snapshot, SnapshotData};
use pvlab::solver::{
    cfl_dt, energy_and_dissipation, simulate, FlowState, InitialCondition, Integrator, SolverConfig, TimeStep,
};

fn torus(n: usize) -> Grid3 {
    Grid3::torus_2pi(n).unwrap()
}

fn fixed(grid: Grid3, t_end: f64, dt: f64, ic: InitialCondition) -> SolverConfig {
    let mut c = SolverConfig::new(grid, t_end, ic);
    c.dt = TimeStep::Fixed(dt);
    c
}

fn final_velocity(cfg: &SolverConfig) -> VectorField<f64> {
    simulate::<f64>(cfg).unwrap().pop().unwrap().v
}

#[test]
fn shear_follows_heat_decay() {
    let g = torus(32);
    let a = 1.5;
    let mut cfg = fixed(g, 0.1, 1e-3, InitialCondition::Shear(a));
    cfg.snapshot_every = 25;
    let states = simulate::<f64>(&cfg).unwrap();
    assert_eq!(states.len(), 5);
    for s in &states {
        let exact = VectorField::from_fn(g, |_, y, _| [a * (-s.t).exp() * y.sin(), 0.0, 0.0]);
        assert!(s.v.max_abs_diff(&exact).unwrap() <= 1e-8, "t = {}", s.t);
        assert!(s.pi.max_abs() < 1e-12);
    }
    assert!((states.last().unwrap().t - 0.1).abs() < 1e-15);
}

#[test]
fn zero_state_stays_zero() {
    let g = torus(16);
    let integ = Integrator::<f64>::new(g, 2.0 / 3.0, 1.0);
    let s0 = FlowState::new(integ.spectral(), 0.0, VectorField::zeros(g)).unwrap();
    let s1 = integ.step(&s0, 1e-3).unwrap();
    assert_eq!(s1.v.max_abs(), 0.0);
    assert_eq!(s1.pi.max_abs(), 0.0);
}

#[test]
fn taylor_green_energy_decreases_and_stays_solenoidal() {
    let g = torus(32);
    let cfg = SolverConfig::new(g, 0.5, InitialCondition::TaylorGreen(1.0));
    let states = simulate::<f64>(&cfg).unwrap();
    let sp = Spectral::<f64>::new(g);
    let mut last = f64::INFINITY;
    for s in &states {
        let (e, d) = energy_and_dissipation(&sp, &s.v).unwrap();
        assert!(e < last, "energy rose at t = {}", s.t);
        assert!(d > 0.0);
        last = e;
        assert!(sp.divergence(&s.v).unwrap().max_abs() <= 1e-8);
    }
}

#[test]
fn fourth_order_self_convergence() {
    let g = torus(16);
    let run = |dt: f64| final_velocity(&fixed(g, 0.2, dt, InitialCondition::TaylorGreen(4.0)));
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    let e1 = a.max_abs_diff(&b).unwrap();
    let e2 = b.max_abs_diff(&c).unwrap();
    assert!(e1 / e2 >= 8.0, "factor {} ({e1:e}, {e2:e})", e1 / e2);
}

#[test]
fn energy_at_unit_time_is_converged_in_dt() {
    let g = torus(32);
    let sp = Spectral::<f64>::new(g);
    let base = SolverConfig::new(g, 1.0, InitialCondition::TaylorGreen(1.0));
    let v0 = InitialCondition::TaylorGreen(1.0).velocity::<f64>(&sp).unwrap();
    let dt = pvlab::solver::schedule(&base, &v0).dt;
    let mut coarse = base.clone();
    coarse.snapshot_every = usize::MAX;
    let mut fine = coarse.clone();
    fine.dt = TimeStep::Fixed(dt / 2.0);
    let e = |c: &SolverConfig| energy_and_dissipation(&sp, &final_velocity(c)).unwrap().0;
    let (ec, ef) = (e(&coarse), e(&fine));
    assert!((ec - ef).abs() <= 1e-6 * ef, "{ec} vs {ef}");
}

#[test]
fn resuming_from_a_snapshot_reproduces_the_run() {
    let g = torus(16);
    let dir = tempfile::tempdir().unwrap();
    let ic = InitialCondition::RandomSolenoidal { seed: 3, slope: -5.0 / 3.0 };
    let whole = final_velocity(&fixed(g, 0.2, 1e-2, ic.clone()));
    let half = final_velocity(&fixed(g, 0.1, 1e-2, ic));
    let path = dir.path().join("mid.pvrl");
    write_snapshot(&path, &SnapshotData::Vector(half)).unwrap();
    let mut resume = fixed(g, 0.2, 1e-2, InitialCondition::FromFile(path));
    resume.t_start = 0.1;
    let states = simulate::<f64>(&resume).unwrap();
    assert!((states[0].t - 0.1).abs() < 1e-15);
    let end = &states.last().unwrap().v;
    assert!(end.max_abs_diff(&whole).unwrap() <= 1e-10);
}

#[test]
fn time_step_bounds() {
    let g = torus(32);
    let dx = 2.0 * PI / 32.0;
    let viscous = dx * dx * 2.785 / (PI * PI);
    assert_eq!(cfl_dt(&VectorField::<f64>::zeros(g), &g, 1.0, 1.0), viscous);

    // Weak viscosity so the advective limit binds.
    let v = VectorField::<f64>::from_fn(g, |_, y, _| [y.sin(), 0.0, 0.0]);
    let one = cfl_dt(&v, &g, 1.0, 1e-4);
    let two = cfl_dt(&v.scale(2.0), &g, 1.0, 1e-4);
    assert!((one / two - 2.0).abs() < 1e-12);

    let tg = InitialCondition::TaylorGreen(1.0).velocity::<f64>(&Spectral::new(g)).unwrap();
    let vmax = tg
        .components()
        .iter()
        .fold(vec![0.0; g.len()], |acc, c| acc.iter().zip(c.values()).map(|(a, b)| a + b * b).collect())
        .into_iter()
        .fold(0.0f64, |m, s| m.max(s.sqrt()));
    let expected = 0.5 * (dx / vmax).min(viscous);
    assert!((cfl_dt(&tg, &g, 0.5, 1.0) - expected).abs() < 1e-15);
}
