//! Command-line front end.
//!
//! `solve` runs a multi-start batch, `sweep` solves once per value of β or
//! λ, `check` runs self-tests on a problem and `suite list` prints the
//! built-in problems. Every command validates its whole configuration before
//! any file is written.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::driver::{best_index, multi_start, sample_start, solve, Schedule, SolveReport};
use crate::energy::{EnergyFunction, EnergyParams};
use crate::flow::{integrate, lyapunov_report, write_csv_rows, FlowConfig};
use crate::model::{central_difference, ProblemDef, ScalarField};
use crate::regularize::{ncp_grid_violations, RegularizedStack};
use crate::suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Everything a `solve` or `sweep` run needs. Loaded from `--config` JSON,
/// then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub x0: Option<Vec<f64>>,
    pub schedule: Schedule,
    pub n_starts: usize,
    pub root_seed: u64,
    pub flow: FlowConfig,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: None,
            x0: None,
            schedule: Schedule::default(),
            n_starts: 1,
            root_seed: 0,
            flow: FlowConfig::default(),
            out_dir: PathBuf::from("mpcc-out"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mpcc-flow", version, about = "Gradient-flow solver for programs with complementarity constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multi-start solve with trajectory CSVs and a JSON report.
    Solve(RunArgs),
    /// One solve per value of β or λ from a fixed initial point.
    Sweep(SweepArgs),
    /// Gradient, NCP and energy-descent self-checks for a problem.
    Check(CheckArgs),
    /// Built-in problems.
    Suite {
        #[command(subcommand)]
        command: SuiteCommand,
    },
}

#[derive(Subcommand, Debug)]
enum SuiteCommand {
    /// List problem ids, sizes and reference values.
    List,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Problem id (see `suite list`).
    #[arg(long)]
    problem: Option<String>,
    /// Initial point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Relaxation parameters per stage, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Penalty parameters per stage, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Restart every stage from the initial point.
    #[arg(long)]
    no_warm_start: bool,
    /// Number of sampled initial points [default: 1].
    #[arg(long)]
    starts: Option<usize>,
    /// Root seed for the sampled initial points [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Integration horizon per stage.
    #[arg(long)]
    t_end: Option<f64>,
    /// Relative integrator tolerance.
    #[arg(long)]
    rtol: Option<f64>,
    /// Absolute integrator tolerance.
    #[arg(long)]
    atol: Option<f64>,
    /// Equilibrium threshold on the energy gradient (max norm).
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Accepted-step cap per stage.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Record every k-th accepted step in the trajectory.
    #[arg(long)]
    record_every: Option<usize>,
    /// Output directory [default: mpcc-out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// JSON file with a RunConfig; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// β values; λ comes from `--lambda`.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_lambda")]
    sweep_beta: Option<Vec<f64>>,
    /// λ values; β comes from `--beta`.
    #[arg(long, value_delimiter = ',')]
    sweep_lambda: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    /// Seed for the sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Configuration problem detected before any computation.
#[derive(Debug)]
struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Suite { command: SuiteCommand::List } => cmd_suite_list(out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILED
        }
    }
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load_config(args: &RunArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &args.problem {
        cfg.problem = Some(p.clone());
    }
    if let Some(x) = &args.x0 {
        cfg.x0 = Some(x.clone());
    }
    if let Some(b) = &args.beta {
        cfg.schedule.betas = b.clone();
    }
    if let Some(l) = &args.lambda {
        cfg.schedule.lambdas = l.clone();
    }
    if args.no_warm_start {
        cfg.schedule.warm_start = false;
    }
    if let Some(n) = args.starts {
        cfg.n_starts = n;
    }
    if let Some(s) = args.seed {
        cfg.root_seed = s;
    }
    let f = &mut cfg.flow;
    f.t_end = args.t_end.unwrap_or(f.t_end);
    f.rtol = args.rtol.unwrap_or(f.rtol);
    f.atol = args.atol.unwrap_or(f.atol);
    f.grad_tol = args.grad_tol.or(f.grad_tol);
    f.max_steps = args.max_steps.unwrap_or(f.max_steps);
    f.record_every = args.record_every.unwrap_or(f.record_every);
    if let Some(d) = &args.out_dir {
        cfg.out_dir = d.clone();
    }
    Ok(cfg)
}

fn resolve_problem(cfg: &RunConfig) -> Result<ProblemDef, ConfigError> {
    let id = cfg.problem.as_deref().ok_or_else(|| ConfigError("no problem given (use --problem)".into()))?;
    let p = suite::by_id(id)?;
    if let Some(x0) = &cfg.x0 {
        p.check_point(x0)?;
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError("x0 must be finite".into()));
        }
    }
    cfg.flow.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    command: &'static str,
    config: &'a RunConfig,
    best: Option<usize>,
    reports: &'a [SolveReport],
}

fn cmd_solve(args: RunArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load_config(&args)?;
    let problem = resolve_problem(&cfg)?;
    cfg.schedule.validate().map_err(ConfigError::from)?;
    if cfg.n_starts == 0 {
        return Err(ConfigError("--starts must be >= 1".into()).into());
    }
    if cfg.x0.is_some() && cfg.n_starts > 1 {
        return Err(ConfigError("--x0 fixes a single start; drop --starts or --x0".into()).into());
    }

    let (reports, best) = match &cfg.x0 {
        Some(x0) => {
            let r = solve(&problem, &cfg.schedule, x0, &cfg.flow).map_err(ConfigError::from)?;
            let best = best_index(std::slice::from_ref(&r));
            (vec![r], best)
        }
        None => {
            let ms = multi_start(&problem, &cfg.schedule, cfg.n_starts, cfg.root_seed, &cfg.flow)
                .map_err(ConfigError::from)?;
            (ms.reports, ms.best)
        }
    };

    fs::create_dir_all(&cfg.out_dir)?;
    for r in &reports {
        write_trajectory(&cfg.out_dir, r.start_index, r)?;
    }
    let doc = SolveOutput { command: "solve", config: &cfg, best, reports: &reports };
    write_json(&cfg.out_dir.join("report.json"), &doc)?;

    writeln!(out, "{:>5}  {:>12}  {:>12}  {:>14}  {:>5}", "start", "f", "violation", "terminal", "class")?;
    for r in &reports {
        writeln!(
            out,
            "{:>5}  {:>12}  {:>12}  {:>14}  {:>5}",
            r.start_index,
            fmt_sig(r.final_objective),
            fmt_sig(r.mpcc_feasibility.max_violation),
            r.terminal_reason.as_str(),
            r.stationarity.as_str()
        )?;
    }
    match best {
        Some(b) => {
            let r = &reports[b];
            writeln!(out, "best: start {b}, f = {}, w = {}", fmt_sig(r.final_objective), fmt_point(&r.final_point))?;
        }
        None => writeln!(out, "best: none (no start is feasible)")?,
    }
    Ok(if reports.iter().any(|r| r.converged) { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    command: &'static str,
    parameter: &'static str,
    values: &'a [f64],
    config: &'a RunConfig,
    reports: &'a [SolveReport],
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut cfg = load_config(&args.run)?;
    let problem = resolve_problem(&cfg)?;
    let (name, values) = match (&args.sweep_beta, &args.sweep_lambda) {
        (Some(v), None) => ("beta", v.clone()),
        (None, Some(v)) => ("lambda", v.clone()),
        _ => return Err(ConfigError("give exactly one of --sweep-beta or --sweep-lambda".into()).into()),
    };
    if values.is_empty() {
        return Err(ConfigError("sweep list is empty".into()).into());
    }
    // the fixed parameter is the last value of its schedule list
    let fixed = if name == "beta" { &cfg.schedule.lambdas } else { &cfg.schedule.betas };
    let fixed = *fixed.last().ok_or_else(|| ConfigError("schedule is empty".into()))?;
    let schedules: Vec<Schedule> = values
        .iter()
        .map(|&v| {
            let (b, l) = if name == "beta" { (v, fixed) } else { (fixed, v) };
            Schedule { betas: vec![b], lambdas: vec![l], warm_start: cfg.schedule.warm_start }
        })
        .collect();
    for s in &schedules {
        s.validate().map_err(ConfigError::from)?;
    }
    let x0 = match &cfg.x0 {
        Some(x) => x.clone(),
        None => sample_start(&problem, cfg.root_seed, 0),
    };
    cfg.x0 = Some(x0.clone());

    let mut reports = Vec::with_capacity(values.len());
    for (i, s) in schedules.iter().enumerate() {
        let mut r = solve(&problem, s, &x0, &cfg.flow).map_err(ConfigError::from)?;
        r.start_index = i;
        reports.push(r);
    }

    fs::create_dir_all(&cfg.out_dir)?;
    for r in &reports {
        write_trajectory(&cfg.out_dir, r.start_index, r)?;
    }
    let reference = problem.reference().map(|r| r.value);
    let mut csv = String::from(name);
    for i in 1..=problem.dim() {
        csv.push_str(&format!(",w{i}"));
    }
    csv.push_str(",f,abs_err_ref\n");
    for (v, r) in values.iter().zip(&reports) {
        csv.push_str(&crate::flow::fmt_full(*v));
        for x in &r.final_point {
            csv.push(',');
            csv.push_str(&crate::flow::fmt_full(*x));
        }
        csv.push(',');
        csv.push_str(&crate::flow::fmt_full(r.final_objective));
        csv.push(',');
        if let Some(fref) = reference {
            csv.push_str(&crate::flow::fmt_full((r.final_objective - fref).abs()));
        }
        csv.push('\n');
    }
    fs::write(cfg.out_dir.join("sweep.csv"), csv)?;
    let doc = SweepOutput { command: "sweep", parameter: name, values: &values, config: &cfg, reports: &reports };
    write_json(&cfg.out_dir.join("report.json"), &doc)?;

    writeln!(out, "{:>12}  {:<40}  {:>12}  {:>12}", name, "w*", "f(w*)", "|f - f_ref|")?;
    for (v, r) in values.iter().zip(&reports) {
        let err = reference.map_or_else(|| "-".to_string(), |fr| fmt_sig((r.final_objective - fr).abs()));
        writeln!(out, "{:>12}  {:<40}  {:>12}  {:>12}", fmt_sig(*v), fmt_point(&r.final_point), fmt_sig(r.final_objective), err)?;
    }
    let any_ok = reports.iter().any(|r| r.failed_stage.is_none() && r.mpcc_feasibility.is_feasible);
    Ok(if any_ok { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let problem = suite::by_id(&args.problem).map_err(ConfigError::from)?;
    let results = run_checks(&problem, args.seed);
    for c in &results {
        writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(if results.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_suite_list(out: &mut dyn Write) -> Result<i32, Failure> {
    writeln!(out, "{:<6}  {:>3}  {:>3}  {:>3}  {:>3}  {:>12}  reference point", "id", "n", "m", "l", "s", "f_ref")?;
    for e in suite::all_entries() {
        let p = &e.problem;
        let (value, point) = match p.reference() {
            Some(r) => (fmt_sig(r.value), r.point.as_deref().map_or_else(|| "-".to_string(), fmt_point)),
            None => ("-".to_string(), "-".to_string()),
        };
        writeln!(
            out,
            "{:<6}  {:>3}  {:>3}  {:>3}  {:>3}  {:>12}  {}",
            p.name(),
            p.dim(),
            p.n_ineq(),
            p.n_eq(),
            p.n_pairs(),
            value,
            point
        )?;
    }
    Ok(EXIT_OK)
}

fn write_trajectory(dir: &Path, index: usize, r: &SolveReport) -> std::io::Result<()> {
    let mut buf = Vec::new();
    write_csv_rows(&r.trajectory, &mut buf)?;
    fs::write(dir.join(format!("traj_{index}.csv")), buf)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Six significant digits, switching to exponent form outside
/// `[1e-4, 1e6)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        let decimals = (5 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn fmt_point(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|&x| fmt_sig(x)).collect();
    format!("({})", parts.join(", "))
}

/// Outcome of one self-check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Sample points for the self-checks.
pub const CHECK_POINTS: usize = 100;
/// Relative tolerance of the finite-difference comparisons.
pub const CHECK_REL_TOL: f64 = 1e-6;

fn sample_points(problem: &ProblemDef, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let bx = problem.sampling_box();
    (0..count).map(|_| bx.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect()).collect()
}

/// Worst `‖∇F - ∇F_fd‖∞ / max(1, ‖∇F‖∞)` over all analytic fields `F`
/// and points.
pub fn worst_gradient_error(problem: &ProblemDef, points: &[Vec<f64>]) -> f64 {
    let mut fields: Vec<&ScalarField> = vec![problem.objective()];
    fields.extend(problem.ineq());
    fields.extend(problem.eq());
    for p in problem.pairs() {
        fields.push(&p.g);
        fields.push(&p.h);
    }
    let mut worst = 0.0f64;
    for field in fields.into_iter().filter(|f| f.has_analytic_gradient()) {
        for w in points {
            let a = field.gradient(w);
            let mut fd = vec![0.0; w.len()];
            central_difference(&|x: &[f64]| field.value(x), w, &mut fd);
            worst = worst.max(rel_error(&a, &fd));
        }
    }
    worst
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if diff.is_nan() {
        f64::INFINITY
    } else {
        diff / scale
    }
}

/// Points of `w` within `margin` of a kink of `E`: a switching line of φ or
/// a sign change of a stacked constraint.
pub fn near_energy_kink(problem: &ProblemDef, beta: f64, w: &[f64], margin: f64) -> bool {
    let Ok(stack) = RegularizedStack::new(problem, beta) else { return true };
    let Ok(v) = stack.stack_constraints(w) else { return true };
    let ev = problem.evaluate(w).expect("dimension checked above");
    let switching = ev.comp_g.iter().zip(&ev.comp_h).any(|(g, h)| (g + h - 2.0 * beta).abs() < margin);
    switching || v.n.iter().any(|x| x.abs() < margin)
}

/// `‖∇E - ∇E_fd‖∞ / max(1, ‖∇E‖∞)` at the sample points that are at least
/// `1e-3` away from every kink. Returns the worst error and the number of
/// points used.
pub fn worst_energy_gradient_error(problem: &ProblemDef, params: EnergyParams, points: &[Vec<f64>]) -> (f64, usize) {
    let Ok(mut ef) = EnergyFunction::new(problem, params) else { return (f64::INFINITY, 0) };
    let mut worst = 0.0f64;
    let mut used = 0;
    for w in points.iter().filter(|w| !near_energy_kink(problem, params.beta, w, 1e-3)) {
        let mut g = vec![0.0; w.len()];
        ef.value_and_gradient(w, &mut g);
        let mut fd = vec![0.0; w.len()];
        let value = |x: &[f64]| ef.value(x).unwrap_or(f64::NAN);
        central_difference(&value, w, &mut fd);
        worst = worst.max(rel_error(&g, &fd));
        used += 1;
    }
    (worst, used)
}

/// Runs the self-checks on `problem`: analytic gradients against central
/// differences, the NCP sign grid, `∇E` against central differences, and a
/// short energy-descent solve.
pub fn run_checks(problem: &ProblemDef, seed: u64) -> Vec<CheckResult> {
    let points = sample_points(problem, seed, CHECK_POINTS);
    let mut out = Vec::new();

    let g = worst_gradient_error(problem, &points);
    out.push(CheckResult {
        name: "gradients",
        passed: g <= CHECK_REL_TOL,
        detail: format!("worst relative error {} over {} points", fmt_sig(g), points.len()),
    });

    let bad = ncp_grid_violations();
    out.push(CheckResult {
        name: "ncp-grid",
        passed: bad.is_empty(),
        detail: format!("{} violations on the 81x81 grid", bad.len()),
    });

    let params = EnergyParams { beta: 0.1, lambda: 10.0 };
    let (e, used) = worst_energy_gradient_error(problem, params, &points);
    out.push(CheckResult {
        name: "energy-gradient",
        passed: e <= CHECK_REL_TOL && used > 0,
        detail: format!("worst relative error {} over {used} points", fmt_sig(e)),
    });

    let cfg = FlowConfig { t_end: 1.0, ..FlowConfig::default() };
    let descent = integrate(problem, EnergyParams { beta: 0.1, lambda: 100.0 }, &points[0], &cfg);
    let (passed, detail) = match descent {
        Ok(tr) => {
            let rep = lyapunov_report(&tr);
            let ok = rep.monotone && tr.last().energy <= tr.rows[0].energy;
            (ok, format!("{} rows, max uptick {}, terminal {}", tr.rows.len(), fmt_sig(rep.max_uptick), tr.terminal_reason.as_str()))
        }
        Err(e) => (false, e.to_string()),
    };
    out.push(CheckResult { name: "energy-descent", passed, detail });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mpcc-flow").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(1.24197615), "1.24198");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(1.5e-7), "1.50000e-7");
        assert_eq!(fmt_sig(-0.00015), "-0.00015");
        assert_eq!(fmt_sig(123456.7), "123457");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
    }

    #[test]
    fn suite_list_names_every_problem() {
        let (code, out, _) = run_capture(&["suite", "list"]);
        assert_eq!(code, 0);
        for id in suite::PROBLEM_IDS {
            assert!(out.contains(id));
        }
    }

    #[test]
    fn config_errors_exit_2() {
        assert_eq!(run_capture(&["solve", "--problem", "nosuch"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["solve"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["solve", "--problem", "mpcc1", "--x0", "1,2,3"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["solve", "--problem", "mpcc1", "--beta", "0.1,0.2"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["solve", "--problem", "mpcc1", "--rtol", "0"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["sweep", "--problem", "mpcc1"]).0, EXIT_CONFIG);
        assert_eq!(run_capture(&["bogus"]).0, EXIT_CONFIG);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"problem": "mpcc3", "root_seed": 5, "flow": {"t_end": 3.0}, "schedule": {"betas": [0.5]}}"#)
            .unwrap();
        let args = RunArgs { config: Some(path.clone()), seed: Some(9), ..RunArgs::default() };
        let cfg = load_config(&args).unwrap();
        assert_eq!(cfg.problem.as_deref(), Some("mpcc3"));
        assert_eq!(cfg.root_seed, 9);
        assert_eq!(cfg.flow.t_end, 3.0);
        assert_eq!(cfg.flow.rtol, FlowConfig::default().rtol);
        assert_eq!(cfg.schedule.betas, vec![0.5]);
        assert_eq!(cfg.schedule.lambdas, Schedule::default().lambdas);

        fs::write(&path, r#"{"problme": "mpcc3"}"#).unwrap();
        let args = RunArgs { config: Some(path), ..RunArgs::default() };
        assert!(load_config(&args).is_err());
    }

    #[test]
    fn checks_pass_on_suite() {
        for id in ["mpcc1", "mpcc3"] {
            let results = run_checks(&suite::by_id(id).unwrap(), 0);
            assert!(results.iter().all(|c| c.passed), "{id}: {results:?}");
        }
    }
}
