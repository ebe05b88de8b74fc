//! Homotopy schedules, multi-start and the a posteriori analysis of the
//! final point.
//!
//! A solve runs one flow integration per `(β, λ)` stage, optionally
//! warm-starting each stage from the previous final point, then recovers
//! multipliers at the last point and classifies it.

pub mod lsq;
pub mod stationarity;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::flow::{integrate, FlowConfig, TerminalReason, TrajectoryRow};
use crate::model::{Feasibility, IndexSets, ProblemDef};
use crate::regularize::RegularizedStack;

pub use stationarity::{
    certify_multipliers, check_mpcc_licq, classify_stationarity, estimate_multipliers, LicqCheck, MultiplierEstimate,
    Multipliers, Stationarity,
};

/// A sequence of `(β, λ)` stages.
///
/// Stages pair `betas[k]` with `lambdas[k]`; the shorter list repeats its
/// last value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub warm_start: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { betas: vec![1e-1, 1e-2, 1e-3, 1e-4], lambdas: vec![1e2, 1e3, 1e4, 1e5, 1e6], warm_start: true }
    }
}

impl Schedule {
    pub fn single(beta: f64, lambda: f64) -> Self {
        Self { betas: vec![beta], lambdas: vec![lambda], warm_start: true }
    }

    /// `betas` strictly decreasing and positive, `lambdas` strictly
    /// increasing and positive, both non-empty.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.betas.is_empty() || self.lambdas.is_empty() {
            return bad("schedule needs at least one beta and one lambda");
        }
        if !self.betas.iter().all(|&b| b > 0.0 && b.is_finite()) {
            return bad("betas must be positive and finite");
        }
        if !self.lambdas.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return bad("lambdas must be positive and finite");
        }
        if !self.betas.windows(2).all(|p| p[1] < p[0]) {
            return bad("betas must be strictly decreasing");
        }
        if !self.lambdas.windows(2).all(|p| p[1] > p[0]) {
            return bad("lambdas must be strictly increasing");
        }
        Ok(())
    }

    pub fn stages(&self) -> Vec<EnergyParams> {
        let n = self.betas.len().max(self.lambdas.len());
        let at = |v: &[f64], k: usize| v[k.min(v.len() - 1)];
        (0..n).map(|k| EnergyParams { beta: at(&self.betas, k), lambda: at(&self.lambdas, k) }).collect()
    }
}

/// Final state of one schedule stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub beta: f64,
    pub lambda: f64,
    pub final_point: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    /// `max(‖N⁺(w, β)‖∞, ‖h(w)‖∞)` at this stage's `β`.
    pub nlp_violation: f64,
    pub terminal_reason: TerminalReason,
    pub t_final: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Tolerances used to judge the final point. All depend on the last stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisTolerances {
    /// `max(1e-6, 100/λ)`: a penalty equilibrium violates the constraints
    /// by `O(1/λ)`.
    pub feasibility: f64,
    /// `1e-6 + 2β + sqrt(feasibility)`: a side of a pair may sit at up to
    /// `2β` inside the relaxed corner, and a product violation `v` allows
    /// both sides near `sqrt(v)`.
    pub activity: f64,
    /// `max(1e-6, feasibility · max(1, ‖∇f‖∞))`: at a penalty equilibrium
    /// the dropped multiplier terms are `O(1/λ)` relative to `∇f`.
    pub residual: f64,
}

impl AnalysisTolerances {
    pub fn new(params: EnergyParams, grad_f_norm: f64) -> Self {
        let feasibility = (100.0 / params.lambda).max(1e-6);
        let activity = 1e-6 + 2.0 * params.beta + feasibility.sqrt();
        let residual = 1e-6f64.max(feasibility * grad_f_norm.max(1.0));
        Self { feasibility, activity, residual }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub start_index: usize,
    /// Root seed when the initial point was sampled.
    pub seed: Option<u64>,
    pub initial_point: Vec<f64>,
    pub final_point: Vec<f64>,
    pub final_objective: f64,
    pub mpcc_feasibility: Feasibility,
    /// Feasibility for the relaxed program at the last stage's `β`.
    pub nlp_beta_feasibility: Feasibility,
    pub terminal_reason: TerminalReason,
    /// Last stage stopped at a rest point and the final point is MPCC
    /// feasible.
    pub converged: bool,
    pub stationarity: Stationarity,
    pub multipliers: Option<Multipliers>,
    pub residual: Option<f64>,
    pub rank_deficient: bool,
    pub index_sets: Option<IndexSets>,
    pub licq_ok: bool,
    pub tolerances: AnalysisTolerances,
    pub schedule_history: Vec<StageRecord>,
    /// Index of the stage that ended with a non-finite state.
    pub failed_stage: Option<usize>,
    #[serde(skip)]
    pub wallclock: Duration,
    /// All recorded rows, with time running on across stages.
    #[serde(skip)]
    pub trajectory: Vec<TrajectoryRow>,
}

impl SolveReport {
    /// Re-derives the class from the stored multipliers.
    pub fn recheck_stationarity(&self) -> Stationarity {
        match (&self.multipliers, self.residual, &self.index_sets) {
            (Some(m), Some(r), Some(s)) => classify_stationarity(s, &m.eta, &m.zeta, r, self.tolerances.residual),
            _ => Stationarity::None,
        }
    }

    /// The relaxed-program violation of the stage-final points never grows
    /// from one warm-started stage to the next.
    pub fn stage_violation_monotone(&self) -> bool {
        self.schedule_history.windows(2).all(|p| p[1].nlp_violation <= p[0].nlp_violation * (1.0 + 1e-9) + 1e-12)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn nlp_violation(problem: &ProblemDef, beta: f64, w: &[f64]) -> Result<f64> {
    let v = RegularizedStack::new(problem, beta)?.stack_constraints(w)?;
    let worst = v.n.iter().map(|x| x.max(0.0)).chain(v.h.iter().map(|x| x.abs())).fold(0.0f64, f64::max);
    Ok(if worst.is_nan() { f64::INFINITY } else { worst })
}

/// Runs every stage of `schedule` from `w0`, then analyses the final point.
pub fn solve(problem: &ProblemDef, schedule: &Schedule, w0: &[f64], cfg: &FlowConfig) -> Result<SolveReport> {
    solve_indexed(problem, schedule, w0, cfg, 0, None)
}

fn solve_indexed(
    problem: &ProblemDef,
    schedule: &Schedule,
    w0: &[f64],
    cfg: &FlowConfig,
    start_index: usize,
    seed: Option<u64>,
) -> Result<SolveReport> {
    let clock = Instant::now();
    problem.check_point(w0)?;
    schedule.validate()?;
    cfg.validate()?;

    let stages = schedule.stages();
    let mut history = Vec::with_capacity(stages.len());
    let mut rows: Vec<TrajectoryRow> = Vec::new();
    let mut t_offset = 0.0;
    let mut w = w0.to_vec();
    let mut failed_stage = None;
    let mut last_reason = TerminalReason::Equilibrium;

    for (k, params) in stages.iter().enumerate() {
        let start = if schedule.warm_start { w.clone() } else { w0.to_vec() };
        let tr = integrate(problem, *params, &start, cfg)?;
        let last = tr.last().clone();
        // a warm-started stage begins at the previous final row
        let skip = usize::from(!rows.is_empty() && schedule.warm_start);
        for r in tr.rows.iter().skip(skip) {
            let t = r.t + t_offset;
            // a cold restart shares its start time with the previous stage end
            while rows.last().is_some_and(|prev: &TrajectoryRow| prev.t >= t) {
                rows.pop();
            }
            rows.push(TrajectoryRow { t, ..r.clone() });
        }
        t_offset += last.t;
        history.push(StageRecord {
            beta: params.beta,
            lambda: params.lambda,
            final_point: last.w.clone(),
            energy: last.energy,
            grad_norm: last.grad_norm,
            nlp_violation: nlp_violation(problem, params.beta, &last.w)?,
            terminal_reason: tr.terminal_reason,
            t_final: last.t,
            accepted_steps: tr.accepted_steps,
            rejected_steps: tr.rejected_steps,
        });
        last_reason = tr.terminal_reason;
        w = last.w;
        if tr.terminal_reason == TerminalReason::Nonfinite {
            failed_stage = Some(k);
            break;
        }
    }

    let final_params = *stages.get(history.len() - 1).expect("at least one stage");
    let finite = w.iter().all(|x| x.is_finite());
    let grad_f = if finite { inf_norm(&problem.objective().gradient(&w)) } else { f64::INFINITY };
    let tolerances = AnalysisTolerances::new(final_params, grad_f);

    let final_objective = problem.f(&w)?;
    let mpcc_feasibility = problem.mpcc_feasibility(&w, tolerances.feasibility)?;
    let nv = nlp_violation(problem, final_params.beta, &w)?;
    let nlp_beta_feasibility = Feasibility { max_violation: nv, is_feasible: nv <= tolerances.feasibility };

    let mut report = SolveReport {
        problem: problem.name().to_string(),
        start_index,
        seed,
        initial_point: w0.to_vec(),
        final_point: w.clone(),
        final_objective,
        mpcc_feasibility,
        nlp_beta_feasibility,
        terminal_reason: last_reason,
        converged: failed_stage.is_none() && last_reason.is_converged() && mpcc_feasibility.is_feasible,
        stationarity: Stationarity::None,
        multipliers: None,
        residual: None,
        rank_deficient: false,
        index_sets: None,
        licq_ok: false,
        tolerances,
        schedule_history: history,
        failed_stage,
        wallclock: Duration::ZERO,
        trajectory: rows,
    };

    if finite && failed_stage.is_none() {
        if let Ok(est) = certify_multipliers(problem, &w, tolerances.activity, tolerances.residual) {
            report.licq_ok = check_mpcc_licq(problem, &w, tolerances.activity)?.ok;
            report.rank_deficient = est.rank_deficient;
            report.residual = Some(est.residual);
            report.multipliers = Some(est.multipliers);
            report.index_sets = Some(est.index_sets);
            report.stationarity = report.recheck_stationarity();
        }
    }
    report.wallclock = clock.elapsed();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub reports: Vec<SolveReport>,
    /// See [`best_index`].
    pub best: Option<usize>,
}

/// Initial point of start `index`: uniform over the problem's sampling box,
/// drawn from ChaCha20 stream `index` of `root_seed`.
pub fn sample_start(problem: &ProblemDef, root_seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(root_seed);
    rng.set_stream(index as u64);
    problem.sampling_box().iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect()
}

/// Solves from `n_starts` sampled initial points. Each start depends only on
/// `(root_seed, index)`, so the result is independent of execution order.
pub fn multi_start(
    problem: &ProblemDef,
    schedule: &Schedule,
    n_starts: usize,
    root_seed: u64,
    cfg: &FlowConfig,
) -> Result<MultiStart> {
    if n_starts == 0 {
        return Err(Error::InvalidParameter("n_starts must be >= 1".into()));
    }
    schedule.validate()?;
    cfg.validate()?;
    let reports = (0..n_starts)
        .map(|i| solve_indexed(problem, schedule, &sample_start(problem, root_seed, i), cfg, i, Some(root_seed)))
        .collect::<Result<Vec<_>>>()?;
    let best = best_index(&reports);
    Ok(MultiStart { reports, best })
}

/// Lowest objective among MPCC-feasible reports, ties to the lowest index.
/// When no report is MPCC feasible, the same rule is applied to reports
/// feasible for the relaxed program at their last `β`.
pub fn best_index(reports: &[SolveReport]) -> Option<usize> {
    let pick = |admit: &dyn Fn(&SolveReport) -> bool| {
        reports
            .iter()
            .enumerate()
            .filter(|(_, r)| r.failed_stage.is_none() && r.final_objective.is_finite() && admit(r))
            .min_by(|(i, a), (j, b)| a.final_objective.total_cmp(&b.final_objective).then(i.cmp(j)))
            .map(|(i, _)| i)
    };
    pick(&|r| r.mpcc_feasibility.is_feasible).or_else(|| pick(&|r| r.nlp_beta_feasibility.is_feasible))
}
