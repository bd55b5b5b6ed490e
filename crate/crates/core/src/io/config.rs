//! Line-based `section.key = value` run configuration.
//!
//! Parsing is strict: unknown keys, duplicates and malformed lines are
//! rejected with their line number. After defaults are filled in, the
//! configuration is rendered in a canonical sorted form whose SHA-256 is the
//! config hash stamped on every artifact. Output locations are plumbing and
//! stay out of the hash, so the same run written to two directories carries
//! the same hash.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::sha256_hex;
use crate::exponents::Rational;
use crate::field::{Domain, Grid3};
use crate::monitor::{CalibrationOptions, MonitorConfig};
use crate::solver::{InitialCondition, SolverConfig, TimeStep};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{}: {message}", match line { Some(l) => format!("line {l}"), None => "end of input".to_string() })]
    Parse { line: Option<usize>, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Float,
    Rational,
    Bool,
    Text,
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    /// Part of the config hash.
    hashed: bool,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>) -> KeySpec {
    KeySpec { name, kind, default, hashed: true }
}

const KEYS: &[KeySpec] = &[
    key("grid.n", Kind::Int, None),
    key("grid.domain", Kind::Text, Some("torus")),
    key("grid.box_length", Kind::Float, None),
    key("solver.t_start", Kind::Float, Some("0")),
    key("solver.t_end", Kind::Float, None),
    key("solver.dt", Kind::Text, Some("auto")),
    key("solver.dealias", Kind::Rational, Some("2/3")),
    key("solver.cfl_safety", Kind::Float, Some("0.5")),
    key("solver.snapshot_every", Kind::Int, Some("1")),
    key("solver.viscosity", Kind::Float, Some("1")),
    key("solver.initial", Kind::Text, None),
    key("solver.amplitude", Kind::Float, Some("1")),
    key("solver.seed", Kind::Int, Some("0")),
    key("solver.slope", Kind::Rational, Some("-5/3")),
    key("solver.initial_file", Kind::Text, Some("")),
    key("monitor.theta", Kind::Rational, None),
    key("monitor.q", Kind::Rational, None),
    key("monitor.p", Kind::Text, Some("derived")),
    key("monitor.epsilon", Kind::Float, Some("0.1")),
    key("monitor.torus_weight", Kind::Bool, Some("true")),
    key("monitor.c_tol", Kind::Float, Some("50")),
    key("monitor.gronwall_q", Kind::Rational, Some("4")),
    key("monitor.c_gronwall", Kind::Float, Some("1")),
    key("monitor.mu_gronwall", Kind::Float, Some("1")),
    key("calibrate.safety", Kind::Float, Some("1.5")),
    key("calibrate.seeds", Kind::Int, Some("4")),
    KeySpec { name: "output.dir", kind: Kind::Text, default: None, hashed: false },
    KeySpec { name: "output.registry", kind: Kind::Text, default: Some(""), hashed: false },
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub monitor: MonitorConfig,
    pub output_dir: PathBuf,
    pub registry_path: PathBuf,
    pub calibrate_safety: f64,
    pub calibrate_seeds: u64,
    /// Sorted `key = value` lines covered by the hash.
    pub canonical: String,
    pub hash: String,
}

impl RunConfig {
    pub fn calibration_options(&self) -> CalibrationOptions {
        let mut o = CalibrationOptions::new(self.solver.grid);
        o.seeds = (0..self.calibrate_seeds).collect();
        o.safety = self.calibrate_safety;
        o.pairs = vec![(self.monitor.theta.clone(), self.monitor.q.clone())];
        o.c_gronwall = self.monitor.c_gronwall;
        o.mu_gronwall = self.monitor.mu_gronwall;
        o
    }

    /// Makes relative paths relative to `base` instead of the working directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.registry_path);
        if let InitialCondition::FromFile(p) = &mut self.solver.initial_condition {
            fix(p);
        }
    }
}

fn parse_err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

/// Normalized text of one value, or a message describing why it is malformed.
fn normalize(kind: Kind, raw: &str) -> Result<String, String> {
    match kind {
        Kind::Int => {
            raw.parse::<u64>().map(|v| v.to_string()).map_err(|_| format!("`{raw}` is not a non-negative integer"))
        }
        Kind::Float => {
            let v = Rational::parse_exact(raw).map_err(|_| format!("`{raw}` is not a number"))?.to_f64();
            Ok(format!("{v:?}"))
        }
        Kind::Rational => {
            Rational::parse_exact(raw).map(|r| r.to_string()).map_err(|_| format!("`{raw}` is not a rational"))
        }
        Kind::Bool => match raw {
            "true" | "false" => Ok(raw.to_string()),
            _ => Err(format!("`{raw}` is not true or false")),
        },
        Kind::Text => Ok(raw.to_string()),
    }
}

struct Values(BTreeMap<&'static str, String>);

impl Values {
    fn text(&self, k: &str) -> &str {
        &self.0[k]
    }

    fn float(&self, k: &str) -> f64 {
        self.0[k].parse().expect("normalized")
    }

    fn int(&self, k: &str) -> u64 {
        self.0[k].parse().expect("normalized")
    }

    fn rational(&self, k: &str) -> Rational {
        Rational::parse_exact(&self.0[k]).expect("normalized")
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut seen: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(Some(line_no), format!("expected `section.key = value`, found `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if !k.contains('.') {
            return Err(parse_err(Some(line_no), format!("key `{k}` has no section")));
        }
        let spec =
            KEYS.iter().find(|s| s.name == k).ok_or_else(|| parse_err(Some(line_no), format!("unknown key `{k}`")))?;
        let value = normalize(spec.kind, v).map_err(|m| parse_err(Some(line_no), format!("{k}: {m}")))?;
        if let Some((first, _)) = seen.insert(spec.name, (line_no, value)) {
            return Err(parse_err(Some(line_no), format!("duplicate key `{k}` (first set on line {first})")));
        }
    }

    let mut values = BTreeMap::new();
    for spec in KEYS {
        let v = match seen.remove(spec.name) {
            Some((_, v)) => v,
            None => match (spec.default, spec.name) {
                // The box length default depends on the domain.
                (None, "grid.box_length") => String::new(),
                (Some(d), _) => normalize(spec.kind, d).expect("valid default"),
                (None, _) => return Err(parse_err(None, format!("missing required key `{}`", spec.name))),
            },
        };
        values.insert(spec.name, v);
    }
    let domain = match values["grid.domain"].as_str() {
        "torus" => Domain::Torus,
        "windowed" => Domain::WindowedR3,
        other => return Err(ConfigError::Validation(format!("grid.domain must be torus or windowed, got `{other}`"))),
    };
    if values["grid.box_length"].is_empty() {
        let l = match domain {
            Domain::Torus => 2.0 * std::f64::consts::PI,
            Domain::WindowedR3 => 10.0,
        };
        values.insert("grid.box_length", format!("{l:?}"));
    }
    let v = Values(values);
    build(&v, domain)
}

/// Reads and parses a config file; relative paths inside resolve against its directory.
pub fn load_config(path: &Path) -> Result<RunConfig, super::IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| super::IoError::io(path, e))?;
    let mut cfg = parse_config(&text).map_err(|e| super::IoError::Format(e.to_string()))?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok(cfg)
}

fn build(v: &Values, domain: Domain) -> Result<RunConfig, ConfigError> {
    let invalid = |m: String| ConfigError::Validation(m);
    let n = usize::try_from(v.int("grid.n")).map_err(|_| invalid("grid.n too large".into()))?;
    let grid = Grid3::new(n, v.float("grid.box_length"), domain).map_err(|e| invalid(format!("grid: {e}")))?;

    let ic = match v.text("solver.initial") {
        "taylor_green" => InitialCondition::TaylorGreen(v.float("solver.amplitude")),
        "shear" => InitialCondition::Shear(v.float("solver.amplitude")),
        "random" => InitialCondition::RandomSolenoidal {
            seed: v.int("solver.seed"),
            slope: v.rational("solver.slope").to_f64(),
        },
        "file" => {
            let f = v.text("solver.initial_file");
            if f.is_empty() {
                return Err(invalid("solver.initial = file needs solver.initial_file".into()));
            }
            InitialCondition::FromFile(PathBuf::from(f))
        }
        other => {
            return Err(invalid(format!("solver.initial must be taylor_green, shear, random or file, got `{other}`")))
        }
    };
    let mut solver = SolverConfig::new(grid, v.float("solver.t_end"), ic);
    solver.t_start = v.float("solver.t_start");
    solver.dt = match v.text("solver.dt") {
        "auto" => TimeStep::Auto,
        s => TimeStep::Fixed(
            Rational::parse_exact(s)
                .map_err(|_| invalid(format!("solver.dt must be auto or a number, got `{s}`")))?
                .to_f64(),
        ),
    };
    solver.dealias = v.rational("solver.dealias").to_f64();
    solver.cfl_safety = v.float("solver.cfl_safety");
    solver.snapshot_every = v.int("solver.snapshot_every") as usize;
    solver.viscosity = v.float("solver.viscosity");
    solver.validate().map_err(|e| invalid(e.to_string()))?;

    let mut monitor = MonitorConfig::new(v.rational("monitor.theta"), v.rational("monitor.q"));
    monitor.p = match v.text("monitor.p") {
        "derived" => None,
        s => Some(
            Rational::parse_exact(s)
                .map_err(|_| invalid(format!("monitor.p must be derived or a rational, got `{s}`")))?,
        ),
    };
    monitor.epsilon = v.float("monitor.epsilon");
    monitor.torus_weight = v.text("monitor.torus_weight") == "true";
    monitor.c_tol = v.float("monitor.c_tol");
    monitor.gronwall_q = v.rational("monitor.gronwall_q");
    monitor.c_gronwall = v.float("monitor.c_gronwall");
    monitor.mu_gronwall = v.float("monitor.mu_gronwall");
    monitor.validate().map_err(|e| invalid(e.to_string()))?;

    let calibrate_safety = v.float("calibrate.safety");
    if !calibrate_safety.is_finite() || calibrate_safety < 1.0 {
        return Err(invalid("calibrate.safety must be at least 1".into()));
    }
    let calibrate_seeds = v.int("calibrate.seeds");
    if calibrate_seeds == 0 {
        return Err(invalid("calibrate.seeds must be positive".into()));
    }

    let output_dir = PathBuf::from(v.text("output.dir"));
    if output_dir.as_os_str().is_empty() {
        return Err(invalid("output.dir is empty".into()));
    }
    let registry_path = match v.text("output.registry") {
        "" => output_dir.join("constants.txt"),
        s => PathBuf::from(s),
    };

    let mut canonical = String::new();
    for spec in KEYS.iter().filter(|s| s.hashed) {
        let _ = writeln!(canonical, "{} = {}", spec.name, v.text(spec.name));
    }
    let hash = sha256_hex(canonical.as_bytes());
    Ok(RunConfig { solver, monitor, output_dir, registry_path, calibrate_safety, calibrate_seeds, canonical, hash })
}
