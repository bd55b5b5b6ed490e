use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pvlab::exponents::{conjugate_split, ExponentError, ExtendedRational, Rational};
use pvlab::field::{Grid3, Spectral};
use pvlab::io::{
    load_config, load_trajectory, read_snapshot, IoError, Manifest, RunConfig, SnapshotData, TrajectoryWriter,
};
use pvlab::lorentz::registry::{self, ConstantsRegistry, RegistryError};
use pvlab::lorentz::{lebesgue_norm, lorentz_quasi_norm, LorentzError};
use pvlab::monitor::{
    calibrate, run_monitor, CalibrationOptions, MonitorConfig, MonitorConstants, MonitorError, MonitorReport,
};
use pvlab::solver::{simulate_with, SolverError};

#[derive(Parser)]
#[command(name = "pvlab", version, about = "Mixed pressure-velocity regularity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured flow and write a trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory directory; defaults to `<output.dir>/trajectory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the criterion and the estimate chain along a trajectory.
    Monitor {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Constants registry; calibrated on the fly when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Print the exponent split for `(θ, q)` as JSON.
    Exponents {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        q: String,
    },
    /// Lorentz norm of a snapshot field (vector fields use `|v|`).
    Norms {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: String,
        /// A rational or `inf`.
        #[arg(long)]
        q: String,
    },
    /// Sweep the calibration corpus and write the constants registry.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full inequality suite; exits 1 if any verdict fails.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Existing trajectory manifest; simulated from the config when omitted.
        #[arg(long)]
        traj: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Verdict(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verdict(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Verdict(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ExponentError> for CliError {
    fn from(e: ExponentError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Missing(_) => CliError::Usage(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<LorentzError> for CliError {
    fn from(e: LorentzError) -> Self {
        match e {
            LorentzError::Field(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<MonitorError> for CliError {
    fn from(e: MonitorError) -> Self {
        match e {
            MonitorError::InvalidConfig(_)
            | MonitorError::ExponentInfeasible(_)
            | MonitorError::QOutOfRange(_)
            | MonitorError::Registry(RegistryError::Missing(_)) => CliError::Usage(e.to_string()),
            MonitorError::InsufficientSnapshots { .. } | MonitorError::NonUniformSpacing | MonitorError::Field(_) => {
                CliError::Io(e.to_string())
            }
            _ => CliError::Verdict(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            SolverError::StabilityViolation { .. } => CliError::Verdict(e.to_string()),
            SolverError::Field(_) | SolverError::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn rational(name: &str, text: &str) -> Result<Rational, CliError> {
    Rational::parse_exact(text).map_err(|_| CliError::Usage(format!("--{name}: `{text}` is not a rational")))
}

/// Config load failures split into format problems (exit 2) and unreadable files (exit 3).
fn config(path: &Path) -> Result<RunConfig, CliError> {
    match load_config(path) {
        Ok(c) => Ok(c),
        Err(IoError::Format(m)) => Err(CliError::Usage(format!("{}: {m}", path.display()))),
        Err(e) => Err(e.into()),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json") + "\n";
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn simulate_to(cfg: &RunConfig, dir: &Path) -> Result<PathBuf, CliError> {
    let manifest = Manifest::new(&cfg.hash, cfg.solver.grid, cfg.solver.viscosity);
    let mut writer = TrajectoryWriter::create(dir, manifest)?;
    let sched = simulate_with::<f64>(&cfg.solver, |step, state| {
        writer.push(step, state).map_err(|e| SolverError::Io(e.to_string()))
    })?;
    Ok(writer.finish(sched.dt)?)
}

fn check_hash(what: &str, found: Option<&str>, expected: &str) -> Result<(), CliError> {
    match found {
        Some(h) if h == expected => Ok(()),
        Some(h) => {
            Err(CliError::Usage(format!("{what} has config hash {h}, expected {expected}; refusing mixed inputs")))
        }
        None => Err(CliError::Usage(format!("{what} carries no config hash"))),
    }
}

fn gronwall_from(reg: &ConstantsRegistry, cfg: &mut MonitorConfig) {
    if let Some(c) = reg.get(registry::C_GRONWALL) {
        cfg.c_gronwall = c;
    }
    if let Some(m) = reg.get(registry::MU_GRONWALL) {
        cfg.mu_gronwall = m;
    }
}

fn report_stem(theta: &Rational, q: &Rational) -> String {
    let clean = |r: &Rational| match r.is_integer() {
        true => r.numer().to_string(),
        false => r.to_string().replace('/', "-"),
    };
    format!("report_theta{}_q{}", clean(theta), clean(q))
}

fn print_verdicts(report: &MonitorReport) {
    for v in &report.verdicts {
        eprintln!("  {:<28} {}  margin {:.3e}", v.name, if v.pass { "pass" } else { "FAIL" }, v.worst_margin);
    }
}

fn cmd_simulate(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = config(config_path)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.join("trajectory"));
    let manifest = simulate_to(&cfg, &dir)?;
    println!("{}", manifest.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_monitor(
    traj: &Path,
    theta: &str,
    q: &str,
    p: Option<String>,
    epsilon: Option<f64>,
    out: &Path,
    registry_path: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut mc = MonitorConfig::new(rational("theta", theta)?, rational("q", q)?);
    mc.p = p.map(|p| rational("p", &p)).transpose()?;
    if let Some(e) = epsilon {
        mc.epsilon = e;
    }
    mc.validate()?;
    let (manifest, states) = load_trajectory(traj)?;
    let reg = match registry_path {
        Some(path) => {
            let reg = ConstantsRegistry::load(&path)?;
            check_hash(&format!("registry {}", path.display()), reg.config_hash(), &manifest.config_hash)?;
            reg
        }
        None => {
            let mut opts = CalibrationOptions::new(manifest.grid);
            opts.pairs = vec![(mc.theta.clone(), mc.q.clone())];
            calibrate(&opts)?.0
        }
    };
    gronwall_from(&reg, &mut mc);
    let constants = MonitorConstants::from_registry(&reg)?;
    let spectral = Spectral::<f64>::new(manifest.grid);
    let report = run_monitor(&spectral, &states, &mc, &constants, &manifest.config_hash)?;
    let (json, _) = report.write(out, "report").map_err(|e| io_err(out, e))?;
    println!("{}", json.display());
    print_verdicts(&report);
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verdict("one or more verdicts failed".into()))
    }
}

fn cmd_exponents(theta: &str, q: &str) -> Result<(), CliError> {
    let theta = rational("theta", theta)?;
    let q = rational("q", q)?;
    let sol = conjugate_split(&theta, &q)?;
    let mc = MonitorConfig::new(theta, q);
    let mut value = serde_json::to_value(&sol).expect("json");
    let obj = value.as_object_mut().expect("object");
    obj.insert("delta".into(), json!(sol.delta2));
    obj.insert("weighted_delta".into(), json!(sol.weighted_delta()));
    obj.insert("absorption_exponent".into(), json!(sol.absorption_exponent()?));
    obj.insert("target1".into(), json!(sol.target1()));
    obj.insert("target2".into(), json!(sol.target2()));
    obj.insert("classification".into(), json!(mc.classification()?));
    println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    Ok(())
}

fn cmd_norms(field: &Path, p: &str, q: &str) -> Result<(), CliError> {
    let p = rational("p", p)?;
    let q = ExtendedRational::parse_exact(q)
        .map_err(|_| CliError::Usage(format!("--q: `{q}` is not a rational or inf")))?;
    let f = match read_snapshot(field)? {
        SnapshotData::Scalar(s) => s,
        SnapshotData::Vector(v) => v.magnitude(),
    };
    let r = lorentz_quasi_norm(&f, &p, &q)?;
    let mut out =
        json!({ "field": field.display().to_string(), "p": r.p, "q": r.q, "value": r.value, "method": r.method });
    if q == ExtendedRational::Finite(p.clone()) {
        out["lebesgue"] = json!(lebesgue_norm(&f, &p)?);
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn calibrated(cfg: &RunConfig) -> Result<ConstantsRegistry, CliError> {
    let (mut reg, summary) = calibrate(&cfg.calibration_options())?;
    reg.set_config_hash(cfg.hash.clone());
    eprintln!("calibrated on {} fields", summary.fields);
    Ok(reg)
}

fn cmd_calibrate(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = config(config_path)?;
    let path = out.unwrap_or_else(|| cfg.registry_path.clone());
    let reg = calibrated(&cfg)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    reg.save(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn verify_pairs(cfg: &RunConfig) -> Vec<(Rational, Rational)> {
    let mut pairs = vec![(cfg.monitor.theta.clone(), cfg.monitor.q.clone())];
    for (t, q) in [(0, 2), (1, 4), (2, 4)] {
        let pair = (Rational::new(t, 2).expect("nonzero"), Rational::int(q));
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs
}

fn cmd_verify(config_path: &Path, traj: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = config(config_path)?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;

    let reg = if cfg.registry_path.exists() {
        let reg = ConstantsRegistry::load(&cfg.registry_path)?;
        check_hash(&format!("registry {}", cfg.registry_path.display()), reg.config_hash(), &cfg.hash)?;
        reg
    } else {
        let reg = calibrated(&cfg)?;
        reg.save(&cfg.registry_path)?;
        reg
    };
    let manifest_path = match traj {
        Some(p) => p,
        None => simulate_to(&cfg, &out.join("trajectory"))?,
    };
    let (manifest, states) = load_trajectory(&manifest_path)?;
    check_hash(&format!("trajectory {}", manifest_path.display()), Some(&manifest.config_hash), &cfg.hash)?;
    let grid: Grid3 = manifest.grid;
    let spectral = Spectral::<f64>::new(grid);
    let constants = MonitorConstants::from_registry(&reg)?;

    let reports_dir = out.join("reports");
    let mut entries = Vec::new();
    let mut all_passed = true;
    for (theta, q) in verify_pairs(&cfg) {
        let mut mc = cfg.monitor.clone();
        if (&theta, &q) != (&cfg.monitor.theta, &cfg.monitor.q) {
            mc.theta = theta.clone();
            mc.q = q.clone();
            mc.p = None;
        }
        gronwall_from(&reg, &mut mc);
        let report = run_monitor(&spectral, &states, &mc, &constants, &cfg.hash)?;
        let stem = report_stem(&theta, &q);
        report.write(&reports_dir, &stem).map_err(|e| io_err(&reports_dir, e))?;
        eprintln!("theta = {theta}, q = {q}: {}", if report.passed { "pass" } else { "FAIL" });
        print_verdicts(&report);
        all_passed &= report.passed;
        entries.push(json!({
            "theta": theta,
            "q": q,
            "passed": report.passed,
            "report": format!("reports/{stem}.json"),
            "failed": report.failed().map(|v| v.name.clone()).collect::<Vec<_>>(),
        }));
    }
    let summary_path = out.join("verify.json");
    write_json(&summary_path, &json!({ "config_hash": cfg.hash, "passed": all_passed, "pairs": entries }))?;
    println!("{}", summary_path.display());
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Verdict("one or more verdicts failed".into()))
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("PVLAB_THREADS") else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PVLAB_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Monitor { traj, theta, q, p, epsilon, out, registry } => {
            cmd_monitor(&traj, &theta, &q, p, epsilon, &out, registry)
        }
        Command::Exponents { theta, q } => cmd_exponents(&theta, &q),
        Command::Norms { field, p, q } => cmd_norms(&field, &p, &q),
        Command::Calibrate { config, out } => cmd_calibrate(&config, out),
        Command::Verify { config, traj } => cmd_verify(&config, traj),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pvlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
