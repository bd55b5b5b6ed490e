use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::chain::{chain_links, interp_sobolev_bound, ChainLinks, SnapshotNorms, VControl};
use super::ledger::{energy_terms, rows_from_terms, LedgerRow};
use super::{MonitorConfig, MonitorConstants, MonitorError};
use crate::exponents::{
    closing_identity, solve_p, Classification, CriterionKind, CriterionLine, ExponentSolution, ExtendedRational,
    Rational,
};
use crate::field::{Domain, Spectral};
use crate::lorentz::{lebesgue_norm, weak_norm};
use crate::scalar::Real;
use crate::solver::FlowState;

/// Relative slack granted to links that are exact inequalities.
pub const ROUNDING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// Smallest relative gap `(bound − value)/bound` seen, negative on failure.
    /// The ledger reports its absolute margin instead.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallPoint {
    pub t: f64,
    pub actual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRecord {
    pub t: f64,
    pub links: ChainLinks,
    pub control: VControl,
    pub norms: SnapshotNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub theta: Rational,
    pub q: Rational,
    pub p: Rational,
    pub p_derived: Rational,
    pub classification: Classification,
    pub epsilon: f64,
    pub torus_weight: bool,
    pub c_tol: f64,
    pub gronwall_q: Rational,
    pub c_gronwall: f64,
    pub mu_gronwall: f64,
    pub domain: Domain,
    pub n: usize,
    pub box_length: f64,
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsEcho {
    #[serde(flatten)]
    pub calibrated: MonitorConstants,
    pub sobolev_effective: f64,
    pub young_c_eps: f64,
    pub young_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub generated_unix_ms: u128,
    pub threads: usize,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub config_hash: String,
    pub config: ConfigEcho,
    pub constants: ConstantsEcho,
    pub exponents: ExponentSolution,
    pub absorption_exponent: Rational,
    pub rows: Vec<LedgerRow>,
    pub chain: Vec<ChainRecord>,
    pub criterion_integral: f64,
    pub gronwall: Vec<GronwallPoint>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    /// Wall-clock data; excluded from any comparison of reports.
    pub metadata: Metadata,
}

pub const CSV_HEADER: &str = "t,l4_fourth,ddt_l4,grad_weighted,grad_sq_mod,rhs_pressure,tol_ledger,ledger_margin,tilde_pi_weak,v_shift_l2,holder_bound,absorbed_bound";

impl MonitorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.l4_fourth,
                r.ddt_l4,
                r.grad_weighted,
                r.grad_sq_mod,
                r.rhs_pressure,
                r.tol_ledger,
                r.ledger_margin,
                r.tilde_pi_weak,
                r.v_shift_l2,
                r.holder_bound,
                r.absorbed_bound
            );
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.to_json())?;
        std::fs::write(&csv, self.to_csv())?;
        Ok((json, csv))
    }

    pub fn failed(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0])).sum()
}

fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for (t, v) in times.windows(2).zip(values.windows(2)) {
        acc += 0.5 * (v[0] + v[1]) * (t[1] - t[0]);
        out.push(acc);
    }
    out
}

/// `∫₀ᵀ ‖π̃‖^p_{q,∞} dt` by the trapezoid rule over the snapshots.
pub fn criterion_integral<T: Real>(states: &[FlowState<T>], cfg: &MonitorConfig) -> Result<f64, MonitorError> {
    let p = cfg.effective_p()?.to_f64();
    let sol = cfg.solution()?;
    let mut values = Vec::with_capacity(states.len());
    for s in states {
        let shift = super::v_shift(&s.v, cfg.weight_kind(s.v.grid().domain()));
        let tp = super::tilde_pi(&s.pi, &shift, &sol.theta)?;
        values.push(weak_norm(&tp, &sol.q)?.value.to_f64_lossy().powf(p));
    }
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    Ok(trapezoid(&times, &values))
}

/// `‖v(t)‖_q` against `exp(c μ^{−(3+q)/(q−3)} ∫₀ᵗ ‖v‖_q^p) ‖v₀‖_q` with
/// `2/p + 3/q = 1`.
pub fn gronwall_envelope<T: Real>(
    states: &[FlowState<T>],
    q: &Rational,
    c: f64,
    mu: f64,
) -> Result<Vec<GronwallPoint>, MonitorError> {
    if q <= &Rational::int(3) {
        return Err(MonitorError::QOutOfRange(q.clone()));
    }
    let line = CriterionLine::new(CriterionKind::Lps, 3, None)?;
    let p = match solve_p(&line, &ExtendedRational::Finite(q.clone()))? {
        ExtendedRational::Finite(p) => p.to_f64(),
        ExtendedRational::PositiveInfinity => f64::INFINITY,
    };
    let qf = q.to_f64();
    let norms = states
        .iter()
        .map(|s| Ok(lebesgue_norm(&s.v.magnitude(), q)?.to_f64_lossy()))
        .collect::<Result<Vec<f64>, MonitorError>>()?;
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let powered: Vec<f64> = norms.iter().map(|n| n.powf(p)).collect();
    let integral = cumulative_trapezoid(&times, &powered);
    let rate = c * mu.powf(-(3.0 + qf) / (qf - 3.0));
    let base = norms.first().copied().unwrap_or(0.0);
    Ok(times
        .iter()
        .zip(&norms)
        .zip(&integral)
        .map(|((&t, &actual), &i)| GronwallPoint { t, actual, bound: (rate * i).exp() * base })
        .collect())
}

fn rel_margin(value: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        (bound - value) / bound
    } else if value <= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

struct VerdictBuilder {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    worst_t: f64,
}

impl VerdictBuilder {
    fn new(name: &'static str, tolerance: f64) -> Self {
        VerdictBuilder { name, tolerance, worst: f64::INFINITY, worst_t: f64::NAN }
    }

    fn observe(&mut self, t: f64, value: f64, bound: f64) {
        let m = rel_margin(value, bound);
        if m < self.worst || self.worst_t.is_nan() {
            self.worst = self.worst.min(m);
            self.worst_t = t;
        }
    }

    fn finish(self) -> Verdict {
        let worst = if self.worst.is_infinite() && self.worst > 0.0 { 0.0 } else { self.worst };
        Verdict {
            name: self.name.to_string(),
            pass: worst >= -self.tolerance,
            worst_margin: worst,
            tolerance: self.tolerance,
            detail: format!("worst at t = {}", self.worst_t),
        }
    }
}

fn exact_verdict(name: &str, ok: Result<(), String>) -> Verdict {
    Verdict {
        name: name.to_string(),
        pass: ok.is_ok(),
        worst_margin: 0.0,
        tolerance: 0.0,
        detail: ok.err().unwrap_or_else(|| "exact".into()),
    }
}

fn exponent_checks(sol: &ExponentSolution, p_derived: &Rational) -> Result<(), String> {
    sol.validate().map_err(|e| e.to_string())?;
    let two = Rational::int(2);
    let closing = closing_identity(sol).map_err(|e| e.to_string())?;
    if closing != &two - &sol.theta {
        return Err(format!("closing identity gives {closing}"));
    }
    let e = sol.absorption_exponent().map_err(|e| e.to_string())?;
    if &e != p_derived {
        return Err(format!("absorption exponent {e} differs from p = {p_derived}"));
    }
    Ok(())
}

/// Runs the whole monitor over a uniformly spaced trajectory.
pub fn run_monitor<T: Real>(
    spectral: &Spectral<T>,
    states: &[FlowState<T>],
    cfg: &MonitorConfig,
    constants: &MonitorConstants,
    config_hash: &str,
) -> Result<MonitorReport, MonitorError> {
    cfg.validate()?;
    if states.len() < 3 {
        return Err(MonitorError::InsufficientSnapshots { needed: 3, got: states.len() });
    }
    let grid = *spectral.grid();
    let domain = grid.domain();
    let kind = cfg.weight_kind(domain);
    let sol = cfg.solution()?;
    let p_derived = cfg.derived_p()?;
    let p = cfg.effective_p()?;

    let per_snapshot = states
        .par_iter()
        .map(|s| {
            let e = energy_terms(spectral, s)?;
            let n = SnapshotNorms::compute(spectral, s.t, &s.v, &s.pi, &sol, kind)?;
            let (links, control) = chain_links(&n, &sol, cfg, constants, domain)?;
            Ok((e, n, links, control))
        })
        .collect::<Result<Vec<_>, MonitorError>>()?;

    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let terms: Vec<_> = per_snapshot.iter().map(|x| x.0).collect();
    let mut rows = rows_from_terms(&times, &terms, cfg.c_tol)?;
    for (row, snap) in rows.iter_mut().zip(&per_snapshot[1..]) {
        row.tilde_pi_weak = snap.1.tilde_pi_weak;
        row.v_shift_l2 = snap.1.v2_l2;
        row.holder_bound = snap.2.riesz;
        row.absorbed_bound = snap.2.expanded;
    }

    let mut verdicts = vec![exact_verdict("exponent_identities", exponent_checks(&sol, &p_derived))];

    let coeff = per_snapshot[0].3.grad_mod_coeff;
    verdicts.push(Verdict {
        name: "epsilon_absorbable".into(),
        pass: cfg.epsilon * coeff < 0.5,
        worst_margin: rel_margin(cfg.epsilon * coeff, 0.5),
        tolerance: 0.0,
        detail: format!("{coeff} * epsilon against the dissipation coefficient 1/2"),
    });

    let worst_row = rows.iter().min_by(|a, b| a.ledger_margin.total_cmp(&b.ledger_margin)).expect("three snapshots");
    let tol_max = rows.iter().map(|r| r.tol_ledger).fold(0.0, f64::max);
    let ledger = Verdict {
        name: "energy_ledger".into(),
        pass: rows.iter().all(|r| r.holds()),
        worst_margin: worst_row.ledger_margin,
        tolerance: tol_max,
        detail: format!("absolute margin, worst at t = {}", worst_row.t),
    };
    verdicts.push(ledger);

    let mut pointwise = VerdictBuilder::new("holder_pointwise", ROUNDING_TOL);
    let mut holder = VerdictBuilder::new("holder_lorentz", ROUNDING_TOL);
    let mut riesz = VerdictBuilder::new("riesz_step", ROUNDING_TOL);
    let mut interp = VerdictBuilder::new("interp_sobolev", ROUNDING_TOL);
    let mut young = VerdictBuilder::new("young_absorption", ROUNDING_TOL);
    let mut control_v = VerdictBuilder::new("v_control", ROUNDING_TOL);
    let mut expanded = VerdictBuilder::new("absorption_bound", ROUNDING_TOL);
    for (_, n, l, c) in &per_snapshot {
        let t = n.t;
        pointwise.observe(t, l.lhs, l.pointwise);
        holder.observe(t, l.pointwise, l.holder);
        if let (Some(pi1), Some(v21)) = (n.pi_t1, n.v2_t1) {
            riesz.observe(t, pi1, constants.riesz * v21);
            let t1 = sol.target1().expect("leg used");
            interp.observe(t, v21, interp_sobolev_bound(n, &t1, constants, domain)?);
        }
        riesz.observe(t, l.holder, l.riesz);
        interp.observe(t, n.v2_t2, interp_sobolev_bound(n, &sol.target2(), constants, domain)?);
        young.observe(t, l.interp_sobolev, l.young);
        control_v.observe(t, c.x_sq, c.x_sq_bound);
        control_v.observe(t, c.z_sq, c.z_sq_bound);
        expanded.observe(t, l.lhs, l.expanded);
    }
    verdicts.extend([pointwise, holder, riesz, interp, young, control_v, expanded].map(VerdictBuilder::finish));

    let a_p: Vec<f64> = per_snapshot.iter().map(|x| x.1.tilde_pi_weak.powf(p.to_f64())).collect();
    let criterion = trapezoid(&times, &a_p);
    verdicts.push(Verdict {
        name: "criterion_integral_finite".into(),
        pass: criterion.is_finite(),
        worst_margin: 0.0,
        tolerance: 0.0,
        detail: format!("integral = {criterion}"),
    });

    let gronwall = gronwall_envelope(states, &cfg.gronwall_q, cfg.c_gronwall, cfg.mu_gronwall)?;
    let mut gv = VerdictBuilder::new("gronwall_envelope", ROUNDING_TOL);
    for g in &gronwall {
        gv.observe(g.t, g.actual, g.bound);
    }
    verdicts.push(gv.finish());

    let s = sol.weighted_delta().to_f64();
    let r = 2.0 / s;
    let r_conj = 2.0 / (2.0 - s);
    let constants_echo = ConstantsEcho {
        calibrated: *constants,
        sobolev_effective: super::chain::effective_sobolev(constants, domain, grid.volume()),
        young_c_eps: (cfg.epsilon * r).powf(-r_conj / r) / r_conj,
        young_exponent: r_conj,
    };

    let chain = per_snapshot
        .iter()
        .map(|(_, n, l, c)| ChainRecord { t: n.t, links: *l, control: *c, norms: n.clone() })
        .collect();
    let passed = verdicts.iter().all(|v| v.pass);
    Ok(MonitorReport {
        config_hash: config_hash.to_string(),
        config: ConfigEcho {
            theta: cfg.theta.clone(),
            q: cfg.q.clone(),
            p: p.clone(),
            p_derived,
            classification: cfg.classification()?,
            epsilon: cfg.epsilon,
            torus_weight: cfg.torus_weight,
            c_tol: cfg.c_tol,
            gronwall_q: cfg.gronwall_q.clone(),
            c_gronwall: cfg.c_gronwall,
            mu_gronwall: cfg.mu_gronwall,
            domain,
            n: grid.n(),
            box_length: grid.box_length(),
            snapshots: states.len(),
        },
        constants: constants_echo,
        absorption_exponent: sol.absorption_exponent()?,
        exponents: sol,
        rows,
        chain,
        criterion_integral: criterion,
        gronwall,
        verdicts,
        passed,
        metadata: Metadata {
            generated_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION"),
        },
    })
}
