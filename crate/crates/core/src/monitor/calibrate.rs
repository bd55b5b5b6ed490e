use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::chain::{delta_of_target, SnapshotNorms};
use super::{MonitorConfig, MonitorError};
use crate::exponents::{conjugate_split, Rational};
use crate::field::{Domain, Grid3, Spectral, VectorField, DEFAULT_DEALIAS};
use crate::lorentz::registry::{self, ConstantsRegistry};
use crate::solver::initial::random_solenoidal;
use crate::solver::InitialCondition;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub grid: Grid3,
    pub seeds: Vec<u64>,
    pub slopes: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// `(θ, q)` pairs probed in addition to the defaults.
    pub pairs: Vec<(Rational, Rational)>,
    pub safety: f64,
    pub c_gronwall: f64,
    pub mu_gronwall: f64,
}

impl CalibrationOptions {
    pub fn new(grid: Grid3) -> Self {
        CalibrationOptions {
            grid,
            seeds: (0..4).collect(),
            slopes: vec![-5.0 / 3.0, -3.0, 0.0],
            amplitudes: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            pairs: Vec::new(),
            safety: 1.5,
            c_gronwall: 1.0,
            mu_gronwall: 1.0,
        }
    }

    fn all_pairs(&self) -> Vec<(Rational, Rational)> {
        let mut out = vec![
            (Rational::zero(), Rational::int(2)),
            (Rational::new(1, 2).expect("nonzero"), Rational::int(4)),
            (Rational::one(), Rational::int(4)),
        ];
        for p in &self.pairs {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }
}

/// Largest ratio seen for one constant and the sample that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioMax {
    pub max_ratio: f64,
    pub samples: usize,
    pub argmax: String,
}

impl RatioMax {
    fn empty() -> Self {
        RatioMax { max_ratio: 0.0, samples: 0, argmax: String::new() }
    }

    fn push(&mut self, ratio: Option<f64>, label: &str) {
        if let Some(r) = ratio.filter(|r| r.is_finite()) {
            self.samples += 1;
            if r > self.max_ratio || self.samples == 1 {
                self.max_ratio = r;
                self.argmax = label.to_string();
            }
        }
    }

    fn merge(&mut self, other: RatioMax) {
        if other.samples > 0 && (self.samples == 0 || other.max_ratio > self.max_ratio) {
            self.max_ratio = other.max_ratio;
            self.argmax = other.argmax;
        }
        self.samples += other.samples;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub fields: usize,
    pub safety: f64,
    pub holder: RatioMax,
    pub riesz: RatioMax,
    pub sobolev: RatioMax,
    pub interp: RatioMax,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then(|| num / den)
}

fn abc(grid: Grid3, a: f64) -> VectorField<f64> {
    let k = 2.0 * PI / grid.box_length();
    VectorField::from_fn(grid, |x, y, z| {
        let (x, y, z) = (k * x, k * y, k * z);
        [a * (z.sin() + y.cos()), a * (x.sin() + z.cos()), a * (y.sin() + x.cos())]
    })
}

fn corpus(
    opts: &CalibrationOptions,
    spectral: &Spectral<f64>,
) -> Result<Vec<(String, VectorField<f64>)>, MonitorError> {
    let grid = opts.grid;
    let mut out = Vec::new();
    for &seed in &opts.seeds {
        for &slope in &opts.slopes {
            out.push((format!("random(seed={seed}, slope={slope})"), random_solenoidal(spectral, seed, slope)));
        }
    }
    for &a in &opts.amplitudes {
        for (name, ic) in [("taylor_green", InitialCondition::TaylorGreen(a)), ("shear", InitialCondition::Shear(a))] {
            let v = ic.velocity(spectral).map_err(|e| MonitorError::InvalidConfig(e.to_string()))?;
            out.push((format!("{name}({a})"), v));
        }
        out.push((format!("abc({a})"), abc(grid, a)));
    }
    Ok(out)
}

fn sample(
    label: &str,
    spectral: &Spectral<f64>,
    v: &VectorField<f64>,
    pairs: &[(Rational, Rational)],
) -> Result<[RatioMax; 4], MonitorError> {
    let domain = spectral.grid().domain();
    let pi = spectral.pressure_from_velocity(v)?;
    let mut acc = [RatioMax::empty(), RatioMax::empty(), RatioMax::empty(), RatioMax::empty()];
    for (theta, q) in pairs {
        let sol = conjugate_split(theta, q)?;
        let kind = MonitorConfig::new(theta.clone(), q.clone()).weight_kind(domain);
        let n = SnapshotNorms::compute(spectral, 0.0, v, &pi, &sol, kind)?;
        let tag = format!("{label} at theta={theta}, q={q}");
        let beta = sol.beta.to_f64();

        let leg1 = match n.pi_t1 {
            Some(x) => x.powf(2.0 - beta),
            None => 1.0,
        };
        let holder_den = n.tilde_pi_weak.powf(beta) * leg1 * n.v2_t2.powf(beta);
        acc[0].push(ratio(n.pointwise, holder_den), &tag);

        if let (Some(p1), Some(s1)) = (n.pi_t1, n.vsq_t1) {
            acc[1].push(ratio(p1, s1), &tag);
        }

        let g = n.grad_v2_l2;
        let sob = match domain {
            Domain::Torus => n.v2_centered_l62,
            Domain::WindowedR3 => n.v2_l62,
        };
        acc[2].push(ratio(sob, g), &tag);

        let mut targets = vec![(sol.target2(), n.v2_t2)];
        if let (Some(t1), Some(v1)) = (sol.target1(), n.v2_t1) {
            targets.push((t1, v1));
        }
        for (t, value) in targets {
            let d = delta_of_target(&t)?.to_f64();
            acc[3].push(ratio(value, n.v2_l2.powf(1.0 - d) * n.v2_l62.powf(d)), &tag);
        }
    }
    Ok(acc)
}

/// Estimates the four corpus constants as `safety ×` the largest observed
/// ratio over a fixed family of fields.
pub fn calibrate(opts: &CalibrationOptions) -> Result<(ConstantsRegistry, CalibrationSummary), MonitorError> {
    if !opts.safety.is_finite() || opts.safety < 1.0 {
        return Err(MonitorError::InvalidConfig("calibration safety must be at least 1".into()));
    }
    let spectral = Spectral::<f64>::with_dealias(opts.grid, DEFAULT_DEALIAS);
    let fields = corpus(opts, &spectral)?;
    let pairs = opts.all_pairs();
    let per_field = fields
        .par_iter()
        .map(|(label, v)| sample(label, &spectral, v, &pairs))
        .collect::<Result<Vec<_>, MonitorError>>()?;

    let mut totals = [RatioMax::empty(), RatioMax::empty(), RatioMax::empty(), RatioMax::empty()];
    for f in per_field {
        for (t, x) in totals.iter_mut().zip(f) {
            t.merge(x);
        }
    }
    let [holder, riesz, sobolev, interp] = totals;

    let mut reg = ConstantsRegistry::new();
    // A constant with no usable sample falls back to the bare safety factor.
    let value = |m: &RatioMax| if m.samples > 0 { m.max_ratio * opts.safety } else { opts.safety };
    reg.set(registry::C_HOLDER, value(&holder));
    reg.set(registry::C_RIESZ, value(&riesz));
    reg.set(registry::C_SOBOLEV, value(&sobolev));
    reg.set(registry::C_INTERP, value(&interp));
    reg.set(registry::C_GRONWALL, opts.c_gronwall);
    reg.set(registry::MU_GRONWALL, opts.mu_gronwall);
    reg.set(registry::SAFETY, opts.safety);
    Ok((reg, CalibrationSummary { fields: fields.len(), safety: opts.safety, holder, riesz, sobolev, interp }))
}
