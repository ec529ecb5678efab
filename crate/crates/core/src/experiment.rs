//! Orchestration behind the command-line tool: sweeps, the decay pipeline
//! and the stationary reference, with CSV output.
//!
//! Floats are written as `{:.9e}` (ten significant digits) so identical
//! configurations give byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, StationaryRef, STATIONARY_STEP_BUDGET};
use crate::config::{derive_tau, Combo, Horizon, RunConfig, SchemeChoice};
use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, RunReport, SchemeKind, SolveState, TimeGrid};
use crate::schemes::{run_with, RunOptions};

/// Default step cap of a single run.
pub const DEFAULT_STEP_BUDGET: usize = 100_000;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Execution settings that come from the command line rather than the config.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecOptions {
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Write every k-th step of each trajectory; `None` writes none.
    pub traj_every: Option<usize>,
    pub budget: usize,
    /// Force memory truncation off regardless of the config.
    pub no_truncate: bool,
}

impl ExecOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        ExecOptions {
            out_dir: out_dir.into(),
            workers: None,
            traj_every: None,
            budget: DEFAULT_STEP_BUDGET,
            no_truncate: false,
        }
    }
}

/// Format a float for CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.9e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// One planned run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub combo: Combo,
    pub scheme: SchemeKind,
    pub tau: f64,
    pub spec: ProblemSpec,
    /// No final time was given: `M` is the step budget itself.
    pub open_horizon: bool,
}

/// A combination that was not run, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skip {
    pub alpha: f64,
    pub n: usize,
    pub gamma: f64,
    pub reason: String,
}

fn skip(c: &Combo, reason: String) -> Skip {
    warn!(
        "skipping alpha={} N={} gamma={}: {reason}",
        c.alpha, c.n_intervals, c.gamma_alpha
    );
    Skip {
        alpha: c.alpha,
        n: c.n_intervals,
        gamma: c.gamma_alpha,
        reason,
    }
}

fn horizon_for(config: &RunConfig, budget: usize) -> Horizon {
    match config.horizon {
        Some(t) => Horizon::Final(t),
        None => Horizon::Steps(budget),
    }
}

fn horizon_policy(config: &RunConfig, budget: usize) -> String {
    match config.horizon {
        Some(t) => format!("T = {t}, M = round(T / tau), at most {budget} steps"),
        None => format!("no T given: run until the stopping test, at most {budget} steps"),
    }
}

/// Expand the config into runs. At `alpha = 0` the step is the config's
/// `tau` and `gamma` must equal `1 / h^2`; other values are skipped.
pub fn plan_runs(config: &RunConfig, budget: usize) -> (Vec<RunPlan>, Vec<Skip>) {
    let horizon = horizon_for(config, budget);
    let (a, b) = config.problem.domain;
    let mut plans = Vec::new();
    let mut skips = Vec::new();
    for combo in config.sweep.combos() {
        let h = (b - a) / combo.n_intervals as f64;
        let tau = if combo.alpha == 0.0 {
            let expected = 1.0 / (h * h);
            if ((combo.gamma_alpha - expected) / expected).abs() > 1e-9 {
                skips.push(skip(
                    &combo,
                    format!("alpha = 0 fixes gamma = 1/h^2 = {expected}"),
                ));
                continue;
            }
            config.tau_alpha_zero
        } else {
            match derive_tau(combo.alpha, combo.gamma_alpha, h) {
                Ok(t) => t,
                Err(e) => {
                    skips.push(skip(&combo, e.to_string()));
                    continue;
                }
            }
        };
        let time = match horizon.time_grid(tau) {
            Ok(t) => t,
            Err(e) => {
                skips.push(skip(&combo, e.to_string()));
                continue;
            }
        };
        for scheme in config.scheme.kinds() {
            match config
                .problem
                .spec(combo.alpha, combo.n_intervals, time, scheme, config.tol)
            {
                Ok(spec) => plans.push(RunPlan {
                    combo,
                    scheme,
                    tau,
                    spec,
                    open_horizon: config.horizon.is_none(),
                }),
                Err(e) => skips.push(skip(&combo, e.to_string())),
            }
        }
    }
    (plans, skips)
}

/// Outcome of one planned run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub plan: RunPlan,
    pub result: std::result::Result<RunReport, String>,
}

impl RunOutcome {
    /// Converged, or cut cleanly by the step budget.
    pub fn completed(&self) -> bool {
        matches!(&self.result, Ok(r) if r.converged || r.budget_exhausted)
    }
}

fn run_file_stem(plan: &RunPlan) -> String {
    format!(
        "{}_a{}_N{}_g{}",
        plan.scheme, plan.combo.alpha, plan.combo.n_intervals, plan.combo.gamma_alpha
    )
}

fn write_trajectory(path: &Path, spec: &ProblemSpec, state: &SolveState, every: usize) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "t", "x", "u"])?;
    let tau = spec.time().tau();
    let last = state.current_step();
    for (m, u) in state.history().iter().enumerate() {
        if m % every != 0 && m != last {
            continue;
        }
        let t = fmt_f64(m as f64 * tau);
        for (x, v) in spec.grid().nodes().iter().zip(u) {
            w.write_record([m.to_string(), t.clone(), fmt_f64(*x), fmt_f64(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn execute(plan: &RunPlan, options: &RunOptions, traj: Option<(usize, &Path)>) -> Result<RunReport> {
    let (state, mut report) = run_with(&plan.spec, options)?;
    if plan.open_horizon && !report.converged {
        report.budget_exhausted = true;
    }
    if let Some((every, dir)) = traj {
        let path = dir.join(format!("{}.csv", run_file_stem(plan)));
        write_trajectory(&path, &plan.spec, &state, every.max(1))?;
    }
    Ok(report)
}

/// Run every plan, in parallel up to `workers`, keeping the plan order.
pub fn execute_plans(
    plans: Vec<RunPlan>,
    run_options: &RunOptions,
    exec: &ExecOptions,
) -> Result<Vec<RunOutcome>> {
    let traj_dir = exec.out_dir.join("trajectories");
    if exec.traj_every.is_some() {
        fs::create_dir_all(&traj_dir)?;
    }
    let traj = exec.traj_every.map(|k| (k, traj_dir.as_path()));
    with_pool(exec.workers, || {
        plans
            .into_par_iter()
            .map(|plan| {
                let result = execute(&plan, run_options, traj).map_err(|e| e.to_string());
                match &result {
                    Ok(r) => info!(
                        "{} alpha={} N={} gamma={}: iter={} stop={} fc={} converged={}",
                        plan.scheme,
                        plan.combo.alpha,
                        plan.combo.n_intervals,
                        plan.combo.gamma_alpha,
                        r.n_iterations,
                        fmt_opt(r.stop_time),
                        fmt_opt(r.fc_time),
                        r.converged
                    ),
                    Err(e) => warn!("{} alpha={}: {e}", plan.scheme, plan.combo.alpha),
                }
                RunOutcome { plan, result }
            })
            .collect()
    })
}

/// The summary columns.
pub const SUMMARY_HEADER: [&str; 10] = [
    "alpha",
    "N",
    "gamma",
    "tau",
    "fc_time",
    "stop_time",
    "n_iter",
    "avg_picard",
    "n_ls",
    "converged",
];

fn summary_record(o: &RunOutcome) -> [String; 10] {
    let c = &o.plan.combo;
    let head = [fmt_f64(c.alpha), c.n_intervals.to_string(), fmt_f64(c.gamma_alpha), fmt_f64(o.plan.tau)];
    match &o.result {
        Ok(r) => [
            head[0].clone(),
            head[1].clone(),
            head[2].clone(),
            head[3].clone(),
            fmt_opt(r.fc_time),
            fmt_opt(r.stop_time),
            r.n_iterations.to_string(),
            fmt_opt(r.avg_picard),
            r.n_linear_systems.to_string(),
            r.converged.to_string(),
        ],
        Err(_) => [
            head[0].clone(),
            head[1].clone(),
            head[2].clone(),
            head[3].clone(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            "error".into(),
        ],
    }
}

/// One human-readable line per run.
pub fn report_line(o: &RunOutcome) -> String {
    let c = &o.plan.combo;
    let head = format!(
        "{} alpha={} N={} gamma={} tau={}",
        o.plan.scheme,
        c.alpha,
        c.n_intervals,
        c.gamma_alpha,
        fmt_f64(o.plan.tau)
    );
    match &o.result {
        Ok(r) => format!(
            "{head}: fc_time={} stop_time={} n_iter={} avg_picard={} n_ls={} converged={}{}",
            fmt_opt(r.fc_time),
            fmt_opt(r.stop_time),
            r.n_iterations,
            fmt_opt(r.avg_picard),
            r.n_linear_systems,
            r.converged,
            if r.budget_exhausted { " (budget)" } else { "" }
        ),
        Err(e) => format!("{head}: error: {e}"),
    }
}

#[derive(Serialize)]
struct RunMeta<'a> {
    scheme: &'a str,
    alpha: f64,
    n: usize,
    gamma: f64,
    tau: f64,
    m_steps: usize,
    budget_exhausted: Option<bool>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    command: &'a str,
    example: &'a str,
    horizon_policy: String,
    tol: f64,
    truncate_memory: bool,
    step_budget: usize,
    runs: Vec<RunMeta<'a>>,
    skipped: &'a [Skip],
}

/// Summary of a finished sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub outcomes: Vec<RunOutcome>,
    pub skipped: Vec<Skip>,
    pub exit_code: i32,
}

fn run_options(config: &RunConfig, exec: &ExecOptions) -> RunOptions {
    RunOptions {
        truncate_memory: config.truncate_memory && !exec.no_truncate,
        step_budget: Some(exec.budget),
        ..RunOptions::default()
    }
}

/// Run the parameter product and write `summary_<scheme>.csv` (or
/// `summary.csv` for a single scheme) plus `metadata.json`.
pub fn run_sweep(config: &RunConfig, exec: &ExecOptions) -> Result<SweepResult> {
    run_sweep_named(config, exec, "sweep")
}

/// `run_sweep` for a config that names exactly one combination.
pub fn run_single(config: &RunConfig, exec: &ExecOptions) -> Result<SweepResult> {
    let n = config.sweep.combos().len();
    if n != 1 {
        return Err(Error::Config(format!(
            "`run` needs a single (alpha, N, gamma), config has {n}; use `sweep`"
        )));
    }
    run_sweep_named(config, exec, "run")
}

fn run_sweep_named(config: &RunConfig, exec: &ExecOptions, command: &str) -> Result<SweepResult> {
    fs::create_dir_all(&exec.out_dir)?;
    let options = run_options(config, exec);
    let (plans, skipped) = plan_runs(config, exec.budget);
    let outcomes = execute_plans(plans, &options, exec)?;

    let schemes = config.scheme.kinds();
    for scheme in &schemes {
        let name = match config.scheme {
            SchemeChoice::One(_) => "summary.csv".to_string(),
            SchemeChoice::All => format!("summary_{scheme}.csv"),
        };
        let mut w = csv_writer(&exec.out_dir.join(name))?;
        w.write_record(SUMMARY_HEADER)?;
        for o in outcomes.iter().filter(|o| o.plan.scheme == *scheme) {
            w.write_record(summary_record(o))?;
        }
        w.flush()?;
    }
    for o in &outcomes {
        println!("{}", report_line(o));
    }

    let runs = outcomes
        .iter()
        .map(|o| RunMeta {
            scheme: o.plan.scheme.as_str(),
            alpha: o.plan.combo.alpha,
            n: o.plan.combo.n_intervals,
            gamma: o.plan.combo.gamma_alpha,
            tau: o.plan.tau,
            m_steps: o.plan.spec.time().m_steps(),
            budget_exhausted: o.result.as_ref().ok().map(|r| r.budget_exhausted),
            error: o.result.as_ref().err().map(String::as_str),
        })
        .collect();
    write_json(
        &exec.out_dir.join("metadata.json"),
        &SweepMeta {
            command,
            example: &config.problem.name,
            horizon_policy: horizon_policy(config, exec.budget),
            tol: config.tol,
            truncate_memory: options.truncate_memory,
            step_budget: exec.budget,
            runs,
            skipped: &skipped,
        },
    )?;

    let exit_code = if outcomes.iter().all(RunOutcome::completed) {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    };
    Ok(SweepResult {
        outcomes,
        skipped,
        exit_code,
    })
}

/// Stationary references keyed by `(N, gamma)`.
fn stationary_refs(
    config: &RunConfig,
    exec: &ExecOptions,
) -> Result<BTreeMap<(usize, u64), (ProblemSpec, Result<StationaryRef>)>> {
    let mut keys: Vec<(usize, f64)> = config
        .sweep
        .combos()
        .iter()
        .map(|c| (c.n_intervals, c.gamma_alpha))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    let specs = keys
        .into_iter()
        .map(|(n, gamma)| {
            let spec = config.problem.spec_for_ratio(
                1.0,
                n,
                gamma,
                Horizon::Steps(STATIONARY_STEP_BUDGET),
                SchemeKind::S3,
                config.ref_tol,
            )?;
            Ok(((n, gamma.to_bits()), spec))
        })
        .collect::<Result<Vec<_>>>()?;
    let ref_tol = config.ref_tol;
    with_pool(exec.workers, || {
        specs
            .into_par_iter()
            .map(|(key, spec)| {
                let r = analysis::stationary_solve(&spec, ref_tol);
                (key, (spec, r))
            })
            .collect()
    })
}

#[derive(Serialize)]
struct StationaryMeta {
    n: usize,
    gamma: f64,
    ref_tol: f64,
    steps: Option<usize>,
    contact_extremum: Option<f64>,
    error: Option<String>,
}

/// Compute the stationary reference for every `(N, gamma)` of the config and
/// write `stationary_N<n>_g<gamma>.csv` with columns `x, psi, u_bar, contact`.
pub fn run_stationary(config: &RunConfig, exec: &ExecOptions) -> Result<i32> {
    fs::create_dir_all(&exec.out_dir)?;
    let refs = stationary_refs(config, exec)?;
    let mut meta = Vec::new();
    let mut ok = true;
    for ((n, gbits), (spec, r)) in &refs {
        let gamma = f64::from_bits(*gbits);
        match r {
            Ok(r) => {
                let path = exec.out_dir.join(format!("stationary_N{n}_g{gamma}.csv"));
                let mut w = csv_writer(&path)?;
                w.write_record(["x", "psi", "u_bar", "contact"])?;
                for (((x, p), u), c) in spec.grid().nodes().iter().zip(spec.psi()).zip(&r.u_bar).zip(&r.contact) {
                    w.write_record([fmt_f64(*x), fmt_f64(*p), fmt_f64(*u), (*c as u8).to_string()])?;
                }
                w.flush()?;
                println!(
                    "stationary N={n} gamma={gamma}: steps={} contact_extremum={}",
                    r.steps,
                    fmt_opt(r.contact_extremum)
                );
                meta.push(StationaryMeta {
                    n: *n,
                    gamma,
                    ref_tol: r.solver_tol,
                    steps: Some(r.steps),
                    contact_extremum: r.contact_extremum,
                    error: None,
                });
            }
            Err(e) => {
                ok = false;
                println!("stationary N={n} gamma={gamma}: error: {e}");
                meta.push(StationaryMeta {
                    n: *n,
                    gamma,
                    ref_tol: config.ref_tol,
                    steps: None,
                    contact_extremum: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    write_json(&exec.out_dir.join("metadata.json"), &meta)?;
    Ok(if ok { EXIT_OK } else { EXIT_PARTIAL })
}

/// How a decay row relates to the power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `alpha` in `(0, 1)`: `J(t)` applies.
    Power,
    /// `alpha = 1`: exponential decay, `J` is reported as 0.
    Exp,
    /// The step budget cut the run before the requested time.
    Estimate,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Power => "power",
            Regime::Exp => "exp",
            Regime::Estimate => "estimate",
        }
    }
}

/// One row of `decay.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub alpha: f64,
    pub t: f64,
    pub l1_error: f64,
    pub j_value: f64,
    pub ratio: Option<f64>,
    pub regime: Regime,
}

/// Per-`alpha` result of the decay pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayResult {
    pub combo: Combo,
    pub m_steps: usize,
    pub steps_run: usize,
    pub c_fit: Option<f64>,
    /// Error at the final time `T` (or the last step reached).
    pub final_row: Option<DecayRow>,
    pub rows: Vec<DecayRow>,
    pub error: Option<String>,
}

fn decay_one(
    config: &RunConfig,
    exec: &ExecOptions,
    combo: Combo,
    reference: &StationaryRef,
    final_time: f64,
    scheme: SchemeKind,
) -> Result<DecayResult> {
    let (a, b) = config.problem.domain;
    let h = (b - a) / combo.n_intervals as f64;
    let tau = derive_tau(combo.alpha, combo.gamma_alpha, h)?;
    let end = final_time.max(config.decay_window.1);
    let time = TimeGrid::from_horizon(tau, end)?;
    let spec = config
        .problem
        .spec(combo.alpha, combo.n_intervals, time, scheme, config.tol)?;
    let options = RunOptions {
        stop_on_tolerance: false,
        ..run_options(config, exec)
    };
    let (state, report) = run_with(&spec, &options)?;
    let steps_run = state.current_step();

    let times = analysis::log_spaced(config.decay_window.0, config.decay_window.1, config.decay_samples);
    let samples = analysis::sample_l1_errors(&state, &reference.u_bar, h, tau, &times)?;
    let at_final = analysis::sample_l1_errors(&state, &reference.u_bar, h, tau, &[final_time])?;
    let truncated = report.budget_exhausted;

    let exp_regime = combo.alpha == 1.0;
    let c_fit = if exp_regime {
        None
    } else {
        let usable: Vec<(f64, f64)> = samples
            .iter()
            .copied()
            .filter(|&(t, e)| t >= 1.0 && e > 1e-14)
            .collect();
        if usable.is_empty() {
            None
        } else {
            Some(analysis::fit_decay_constant(&usable, combo.alpha)?)
        }
    };
    let row = |t: f64, e: f64| -> Result<DecayRow> {
        let (j, regime) = match (exp_regime, c_fit) {
            (true, _) => (0.0, Regime::Exp),
            (false, Some(c)) => (analysis::j_decay(t, combo.alpha, c)?, Regime::Power),
            (false, None) => (0.0, Regime::Estimate),
        };
        Ok(DecayRow {
            alpha: combo.alpha,
            t,
            l1_error: e,
            j_value: j,
            ratio: (j > 0.0).then(|| e / j),
            regime,
        })
    };
    let rows = samples
        .iter()
        .map(|&(t, e)| row(t, e))
        .collect::<Result<Vec<_>>>()?;
    let final_row = match at_final.first() {
        Some(&(t, e)) => Some(row(t, e)?),
        None if truncated => {
            let last = state.latest();
            let t = steps_run as f64 * tau;
            let e = analysis::l1_error(last, &reference.u_bar, h)?;
            let mut r = row(t, e)?;
            r.regime = Regime::Estimate;
            Some(r)
        }
        None => None,
    };
    Ok(DecayResult {
        combo,
        m_steps: time.m_steps(),
        steps_run,
        c_fit,
        final_row,
        rows,
        error: None,
    })
}

#[derive(Serialize)]
struct DecayMeta {
    example: String,
    scheme: String,
    final_time: f64,
    window: (f64, f64),
    samples: usize,
    ref_tol: f64,
    step_budget: usize,
    stationary: Vec<StationaryMeta>,
    skipped: Vec<Skip>,
}

/// The decay pipeline: stationary reference, one run per `alpha`, errors at
/// log-spaced times, fitted `C`. Writes `decay.csv` (`alpha, t, l1_error,
/// j_value, ratio, regime`), `decay_summary.csv` and `metadata.json`.
pub fn run_decay(config: &RunConfig, exec: &ExecOptions) -> Result<(Vec<DecayResult>, i32)> {
    let scheme = match config.scheme {
        SchemeChoice::One(s) => s,
        SchemeChoice::All => {
            return Err(key_scheme_err());
        }
    };
    fs::create_dir_all(&exec.out_dir)?;
    let final_time = config.horizon.unwrap_or(10.0);
    let refs = stationary_refs(config, exec)?;

    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for combo in config.sweep.combos() {
        if combo.alpha == 0.0 {
            skipped.push(skip(&combo, "no decay at alpha = 0".into()));
            continue;
        }
        jobs.push(combo);
    }
    let results: Vec<DecayResult> = with_pool(exec.workers, || {
        jobs.into_par_iter()
            .map(|combo| {
                let key = (combo.n_intervals, combo.gamma_alpha.to_bits());
                let outcome = match &refs[&key].1 {
                    Ok(reference) => decay_one(config, exec, combo, reference, final_time, scheme),
                    Err(e) => Err(Error::InvalidArgument(format!("stationary reference: {e}"))),
                };
                outcome.unwrap_or_else(|e| DecayResult {
                    combo,
                    m_steps: 0,
                    steps_run: 0,
                    c_fit: None,
                    final_row: None,
                    rows: Vec::new(),
                    error: Some(e.to_string()),
                })
            })
            .collect()
    })?;

    let mut w = csv_writer(&exec.out_dir.join("decay.csv"))?;
    w.write_record(["alpha", "t", "l1_error", "j_value", "ratio", "regime"])?;
    for r in results.iter().flat_map(|r| &r.rows) {
        w.write_record([
            fmt_f64(r.alpha),
            fmt_f64(r.t),
            fmt_f64(r.l1_error),
            fmt_f64(r.j_value),
            fmt_opt(r.ratio),
            r.regime.as_str().to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&exec.out_dir.join("decay_summary.csv"))?;
    w.write_record(["alpha", "N", "gamma", "M", "steps_run", "t", "l1_error", "j_value", "c_fit", "regime"])?;
    for r in &results {
        let f = r.final_row.as_ref();
        w.write_record([
            fmt_f64(r.combo.alpha),
            r.combo.n_intervals.to_string(),
            fmt_f64(r.combo.gamma_alpha),
            r.m_steps.to_string(),
            r.steps_run.to_string(),
            fmt_opt(f.map(|f| f.t)),
            fmt_opt(f.map(|f| f.l1_error)),
            fmt_opt(f.map(|f| f.j_value)),
            fmt_opt(r.c_fit),
            f.map(|f| f.regime.as_str()).unwrap_or("error").to_string(),
        ])?;
        match (&r.error, f) {
            (Some(e), _) => println!("decay alpha={}: error: {e}", r.combo.alpha),
            (None, Some(f)) => println!(
                "decay alpha={} M={}: l1_error(t={})={} J={} C={} [{}]",
                r.combo.alpha,
                r.m_steps,
                fmt_f64(f.t),
                fmt_f64(f.l1_error),
                fmt_f64(f.j_value),
                fmt_opt(r.c_fit),
                f.regime.as_str()
            ),
            (None, None) => println!("decay alpha={}: final time not reached", r.combo.alpha),
        }
    }
    w.flush()?;

    let stationary = refs
        .iter()
        .map(|((n, g), (_, r))| StationaryMeta {
            n: *n,
            gamma: f64::from_bits(*g),
            ref_tol: config.ref_tol,
            steps: r.as_ref().ok().map(|r| r.steps),
            contact_extremum: r.as_ref().ok().and_then(|r| r.contact_extremum),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    write_json(
        &exec.out_dir.join("metadata.json"),
        &DecayMeta {
            example: config.problem.name.clone(),
            scheme: scheme.to_string(),
            final_time,
            window: config.decay_window,
            samples: config.decay_samples,
            ref_tol: config.ref_tol,
            step_budget: exec.budget,
            stationary,
            skipped,
        },
    )?;
    let code = if results.iter().all(|r| r.error.is_none()) {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    };
    Ok((results, code))
}

fn key_scheme_err() -> Error {
    Error::ConfigKey {
        key: "scheme".into(),
        msg: "the decay pipeline needs a single scheme".into(),
    }
}
