//! Integration of the gradient flow `dw/dt = -∇E(w, β)`.
//!
//! Along exact trajectories `dE/dt = -‖∇E‖² <= 0`, so the energy is a
//! Lyapunov function of the flow. The integrator records `E` and `‖∇E‖∞` at
//! every accepted step and stops at the first of: equilibrium
//! (`‖∇E‖∞ <= grad_tol`), energy stall, time horizon, or step cap.

mod dopri;

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyFunction, EnergyParams};
use crate::error::{Error, Result};
use crate::model::ProblemDef;

pub use dopri::{Dopri5, StepAttempt};

/// Slack allowed per step by [`lyapunov_report`], relative to `max(1, |E|)`.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Energy increase tolerated by the descent guard before a step is rejected.
const GUARD_SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Equilibrium threshold on `‖∇E‖∞`. `None` means
    /// `1e-8 * max(1, λβ)`.
    pub grad_tol: Option<f64>,
    pub stall_window: usize,
    pub stall_eps: f64,
    pub max_steps: usize,
    pub record_every: usize,
    pub h_init: f64,
    pub h_min: f64,
    /// Reject steps that raise the energy by more than a tiny relative
    /// slack, even when the local error estimate passes.
    pub descent_guard: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            rtol: 1e-8,
            atol: 1e-10,
            grad_tol: None,
            stall_window: 50,
            stall_eps: 1e-14,
            max_steps: 5_000_000,
            record_every: 1,
            h_init: 1e-3,
            h_min: 1e-12,
            descent_guard: true,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive and finite");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if let Some(g) = self.grad_tol {
            if !(g > 0.0) {
                return bad("grad_tol must be positive");
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1");
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1");
        }
        if !(self.h_init > 0.0 && self.h_min > 0.0 && self.h_min <= self.h_init) {
            return bad("step sizes must satisfy 0 < h_min <= h_init");
        }
        if self.stall_window == 0 || !(self.stall_eps >= 0.0) {
            return bad("stall_window must be >= 1 and stall_eps >= 0");
        }
        Ok(())
    }

    pub fn grad_tol_for(&self, params: EnergyParams) -> f64 {
        self.grad_tol.unwrap_or_else(|| 1e-8 * (params.lambda * params.beta).max(1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    Equilibrium,
    Stall,
    Horizon,
    StepCap,
    Nonfinite,
    /// The controller asked for a step below `h_min`.
    StepUnderflow,
}

impl TerminalReason {
    /// Stopped at a rest point of the flow rather than by a budget.
    pub fn is_converged(self) -> bool {
        matches!(self, Self::Equilibrium | Self::Stall)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Equilibrium => "equilibrium",
            Self::Stall => "stall",
            Self::Horizon => "horizon",
            Self::StepCap => "step_cap",
            Self::Nonfinite => "nonfinite",
            Self::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub w: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub terminal_reason: TerminalReason,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectory has at least one row")
    }

    /// Writes `t,w1,...,wn,energy,grad_norm` rows at 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_csv_rows(&self.rows, out)
    }
}

pub fn write_csv_rows<W: Write>(rows: &[TrajectoryRow], out: &mut W) -> std::io::Result<()> {
    let n = rows.first().map_or(0, |r| r.w.len());
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",w{i}"));
    }
    header.push_str(",energy,grad_norm\n");
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for r in rows {
        line.clear();
        line.push_str(&fmt_full(r.t));
        for x in &r.w {
            line.push(',');
            line.push_str(&fmt_full(*x));
        }
        line.push(',');
        line.push_str(&fmt_full(r.energy));
        line.push(',');
        line.push_str(&fmt_full(r.grad_norm));
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses rows written by [`Trajectory::write_csv`].
pub fn read_csv<R: BufRead>(input: R) -> std::result::Result<Vec<TrajectoryRow>, String> {
    let mut lines = input.lines();
    let header = lines.next().ok_or("empty input")?.map_err(|e| e.to_string())?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || cols[cols.len() - 2] != "energy" || cols[cols.len() - 1] != "grad_norm" {
        return Err(format!("unexpected header `{header}`"));
    }
    let n = cols.len() - 3;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let vals = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 2)))
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        if vals.len() != n + 3 {
            return Err(format!("line {}: expected {} fields, got {}", lineno + 2, n + 3, vals.len()));
        }
        rows.push(TrajectoryRow { t: vals[0], w: vals[1..=n].to_vec(), energy: vals[n + 1], grad_norm: vals[n + 2] });
    }
    Ok(rows)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Right-hand side `-∇E` that also returns `E`.
fn flow_rhs<'a, 'p>(ef: &'a mut EnergyFunction<'p>) -> impl FnMut(&[f64], &mut [f64]) -> f64 + use<'a, 'p> {
    move |w, out| {
        let e = ef.value_and_gradient(w, out);
        out.iter_mut().for_each(|x| *x = -*x);
        e
    }
}

/// Integrates the flow from `w0` with adaptive Dormand–Prince steps.
pub fn integrate(problem: &ProblemDef, params: EnergyParams, w0: &[f64], cfg: &FlowConfig) -> Result<Trajectory> {
    problem.check_point(w0)?;
    cfg.validate()?;
    let mut ef = EnergyFunction::new(problem, params)?;
    let grad_tol = cfg.grad_tol_for(params);
    let n = w0.len();
    let mut rhs = flow_rhs(&mut ef);

    let mut w = w0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut energy = rhs(&w, &mut k1);
    let mut gnorm = inf_norm(&k1);
    let mut rows = vec![TrajectoryRow { t: 0.0, w: w.clone(), energy, grad_norm: gnorm }];
    let finish = |rows, reason, acc, rej| Ok(Trajectory { rows, terminal_reason: reason, accepted_steps: acc, rejected_steps: rej });

    if !(energy.is_finite() && gnorm.is_finite()) {
        return finish(rows, TerminalReason::Nonfinite, 0, 0);
    }
    if gnorm <= grad_tol {
        return finish(rows, TerminalReason::Equilibrium, 0, 0);
    }

    let mut stepper = Dopri5::new(n, cfg.rtol, cfg.atol);
    let mut w_new = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut t = 0.0;
    let mut h = cfg.h_init.min(cfg.t_end);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut recorded_last = true;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(cfg.stall_window + 1);
    history.push_back(energy);

    let reason = loop {
        if accepted >= cfg.max_steps {
            break TerminalReason::StepCap;
        }
        let remaining = cfg.t_end - t;
        if remaining <= 0.0 {
            break TerminalReason::Horizon;
        }
        // avoid leaving a sliver of the horizon for a final tiny step
        let last = h >= remaining * (1.0 - 1e-12);
        let h_try = if last { remaining } else { h };

        let (err, e_new) = stepper.raw_step(&mut rhs, &w, &k1, h_try, &mut w_new, &mut k7);
        let finite = err.is_finite() && e_new.is_finite() && all_finite(&w_new) && all_finite(&k7);
        let (mut ok, mut h_next) = stepper.control(if finite { err } else { f64::INFINITY }, h_try);
        if ok && cfg.descent_guard && e_new > energy + GUARD_SLACK * energy.abs().max(1.0) {
            ok = false;
            h_next = 0.5 * h_try;
        }
        if !ok {
            rejected += 1;
            h = h_next;
            if h < cfg.h_min {
                break if finite { TerminalReason::StepUnderflow } else { TerminalReason::Nonfinite };
            }
            continue;
        }

        t = if last { cfg.t_end } else { t + h_try };
        std::mem::swap(&mut w, &mut w_new);
        std::mem::swap(&mut k1, &mut k7);
        energy = e_new;
        gnorm = inf_norm(&k1);
        accepted += 1;
        recorded_last = accepted.is_multiple_of(cfg.record_every);
        if recorded_last {
            rows.push(TrajectoryRow { t, w: w.clone(), energy, grad_norm: gnorm });
        }
        h = h_next;

        if gnorm <= grad_tol {
            break TerminalReason::Equilibrium;
        }
        history.push_back(energy);
        if history.len() > cfg.stall_window + 1 {
            history.pop_front();
        }
        if history.len() == cfg.stall_window + 1 {
            let drop = history.front().unwrap() - energy;
            if drop <= cfg.stall_eps * energy.abs() {
                break TerminalReason::Stall;
            }
        }
    };

    if !recorded_last {
        rows.push(TrajectoryRow { t, w: w.clone(), energy, grad_norm: gnorm });
    }
    finish(rows, reason, accepted, rejected)
}

/// One controlled step of size `h` from `w` at the default tolerances.
/// A rejected attempt returns `w` unchanged and a reduced `h_next`.
pub fn step_dense(problem: &ProblemDef, params: EnergyParams, w: &[f64], h: f64) -> Result<StepAttempt> {
    problem.check_point(w)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let cfg = FlowConfig::default();
    let mut ef = EnergyFunction::new(problem, params)?;
    let mut rhs = flow_rhs(&mut ef);
    let n = w.len();
    let mut k1 = vec![0.0; n];
    rhs(w, &mut k1);
    if !all_finite(&k1) {
        return Err(Error::NonFinite);
    }
    let mut stepper = Dopri5::new(n, cfg.rtol, cfg.atol);
    let mut w_new = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let (err, _) = stepper.raw_step(&mut rhs, w, &k1, h, &mut w_new, &mut k7);
    if !(err.is_finite() && all_finite(&w_new)) {
        return Err(Error::NonFinite);
    }
    let (accepted, h_next) = stepper.control(err, h);
    Ok(StepAttempt { accepted, w: if accepted { w_new } else { w.to_vec() }, error: err, h_next })
}

/// Fixed-step 5th-order integration without error control or descent
/// guard. Used to probe how the Lyapunov check reacts to unstable steps.
pub fn integrate_fixed(problem: &ProblemDef, params: EnergyParams, w0: &[f64], h: f64, n_steps: usize) -> Result<Trajectory> {
    problem.check_point(w0)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let mut ef = EnergyFunction::new(problem, params)?;
    let mut rhs = flow_rhs(&mut ef);
    let n = w0.len();
    let mut w = w0.to_vec();
    let mut k1 = vec![0.0; n];
    let energy = rhs(&w, &mut k1);
    let mut rows = vec![TrajectoryRow { t: 0.0, w: w.clone(), energy, grad_norm: inf_norm(&k1) }];
    let mut stepper = Dopri5::new(n, 1.0, 1.0);
    let mut w_new = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut reason = TerminalReason::Horizon;
    for i in 1..=n_steps {
        let (_, e) = stepper.raw_step(&mut rhs, &w, &k1, h, &mut w_new, &mut k7);
        std::mem::swap(&mut w, &mut w_new);
        std::mem::swap(&mut k1, &mut k7);
        rows.push(TrajectoryRow { t: i as f64 * h, w: w.clone(), energy: e, grad_norm: inf_norm(&k1) });
        if !(e.is_finite() && all_finite(&w)) {
            reason = TerminalReason::Nonfinite;
            break;
        }
    }
    let accepted = rows.len() - 1;
    Ok(Trajectory { rows, terminal_reason: reason, accepted_steps: accepted, rejected_steps: 0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub monotone: bool,
    /// Largest energy increase between consecutive rows (0 if none).
    pub max_uptick: f64,
    pub final_grad_norm: f64,
}

/// Checks `E_{k+1} <= E_k + 1e-9 * max(1, |E_k|)` along the rows.
pub fn lyapunov_report(traj: &Trajectory) -> LyapunovReport {
    let mut monotone = true;
    let mut max_uptick = 0.0f64;
    for pair in traj.rows.windows(2) {
        let (a, b) = (pair[0].energy, pair[1].energy);
        let up = b - a;
        if !(up <= MONOTONE_SLACK * a.abs().max(1.0)) {
            monotone = false;
        }
        if up > max_uptick || up.is_nan() {
            max_uptick = if up.is_nan() { f64::INFINITY } else { up };
        }
    }
    LyapunovReport { monotone, max_uptick, final_grad_norm: traj.last().grad_norm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarField;
    use crate::suite;

    fn half_square() -> ProblemDef {
        ProblemDef::builder("decay", 1)
            .objective(ScalarField::new(|w: &[f64]| 0.5 * w[0] * w[0], |w: &[f64], g: &mut [f64]| g[0] = w[0]))
            .build()
            .unwrap()
    }

    #[test]
    fn equilibrium_start_gives_single_row() {
        let p = half_square();
        let tr = integrate(&p, EnergyParams::new(0.0, 1.0).unwrap(), &[0.0], &FlowConfig::default()).unwrap();
        assert_eq!(tr.rows.len(), 1);
        assert_eq!(tr.terminal_reason, TerminalReason::Equilibrium);
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let p = half_square();
        let cfg = FlowConfig { t_end: 1.0, grad_tol: Some(1e-300), ..FlowConfig::default() };
        let w0 = 2.0;
        let tr = integrate(&p, EnergyParams::new(0.0, 1.0).unwrap(), &[w0], &cfg).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::Horizon);
        let last = tr.last();
        assert_eq!(last.t, 1.0);
        let exact = w0 * (-1.0f64).exp();
        assert!((last.w[0] - exact).abs() <= 1e-8 * exact, "{} vs {exact}", last.w[0]);
        // every intermediate row also tracks w0·e^{-t}
        for r in &tr.rows {
            let ex = w0 * (-r.t).exp();
            assert!((r.w[0] - ex).abs() <= 1e-7 * ex);
        }
    }

    #[test]
    fn times_strictly_increase_and_energy_descends() {
        let p = suite::mpcc3();
        let params = EnergyParams::new(0.01, 1e3).unwrap();
        let cfg = FlowConfig { t_end: 5.0, ..FlowConfig::default() };
        let tr = integrate(&p, params, &[1.0, 1.0], &cfg).unwrap();
        assert!(tr.rows.windows(2).all(|r| r[1].t > r[0].t));
        assert!(lyapunov_report(&tr).monotone);
        assert!(tr.last().energy <= tr.rows[0].energy);
    }

    #[test]
    fn equilibrium_contract() {
        let p = suite::mpcc4();
        let params = EnergyParams::new(0.01, 1e3).unwrap();
        let tr = integrate(&p, params, &[1.0, 1.0, 1.0], &FlowConfig::default()).unwrap();
        if tr.terminal_reason == TerminalReason::Equilibrium {
            assert!(tr.last().grad_norm <= FlowConfig::default().grad_tol_for(params));
        }
    }

    #[test]
    fn thinning_keeps_final_row() {
        let p = half_square();
        let cfg = FlowConfig { t_end: 3.0, record_every: 7, grad_tol: Some(1e-300), ..FlowConfig::default() };
        let tr = integrate(&p, EnergyParams::new(0.0, 1.0).unwrap(), &[1.0], &cfg).unwrap();
        assert_eq!(tr.last().t, 3.0);
        assert!(tr.rows.len() < tr.accepted_steps + 1);
    }

    #[test]
    fn step_cap_is_reported() {
        let p = suite::mpcc1();
        let cfg = FlowConfig { max_steps: 3, ..FlowConfig::default() };
        let tr = integrate(&p, EnergyParams::new(1e-4, 1e6).unwrap(), &[1.0, 1.0], &cfg).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::StepCap);
        assert_eq!(tr.accepted_steps, 3);
    }

    #[test]
    fn nonfinite_start_is_reported() {
        let p = suite::mpcc1();
        let tr = integrate(&p, EnergyParams::new(0.0, 1e300).unwrap(), &[1e200, 1e200], &FlowConfig::default()).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::Nonfinite);
        assert_eq!(tr.rows.len(), 1);
    }

    #[test]
    fn step_dense_contract() {
        let p = half_square();
        let params = EnergyParams::new(0.0, 1.0).unwrap();
        // zero gradient: nothing moves
        let s = step_dense(&p, params, &[0.0], 0.5).unwrap();
        assert!(s.accepted);
        assert_eq!(s.w, vec![0.0]);
        // a huge step on a stiff field is rejected and shrinks h
        let p1 = suite::mpcc1();
        let stiff = EnergyParams::new(0.0, 1e6).unwrap();
        let s = step_dense(&p1, stiff, &[1.0, 1.0], 1.0).unwrap();
        assert!(!s.accepted);
        assert_eq!(s.w, vec![1.0, 1.0]);
        assert!(s.h_next < 1.0);
        assert!(step_dense(&p, params, &[0.0], 0.0).is_err());
    }

    #[test]
    fn lyapunov_flags_oversized_fixed_steps() {
        let p = suite::mpcc1();
        let params = EnergyParams::new(0.0, 1e8).unwrap();
        let tr = integrate_fixed(&p, params, &[1.0, 1.0], 1.0, 3).unwrap();
        let rep = lyapunov_report(&tr);
        assert!(!rep.monotone);
        assert!(rep.max_uptick > 0.0);
    }

    #[test]
    fn lyapunov_single_row() {
        let tr = Trajectory {
            rows: vec![TrajectoryRow { t: 0.0, w: vec![1.0], energy: 3.0, grad_norm: 0.5 }],
            terminal_reason: TerminalReason::Equilibrium,
            accepted_steps: 0,
            rejected_steps: 0,
        };
        let r = lyapunov_report(&tr);
        assert!(r.monotone);
        assert_eq!(r.max_uptick, 0.0);
        assert_eq!(r.final_grad_norm, 0.5);
    }

    #[test]
    fn csv_header_and_precision() {
        let tr = Trajectory {
            rows: vec![TrajectoryRow { t: 0.1, w: vec![1.0 / 3.0, -2.0], energy: 1e-300, grad_norm: 0.0 }],
            terminal_reason: TerminalReason::Horizon,
            accepted_steps: 0,
            rejected_steps: 0,
        };
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,w1,w2,energy,grad_norm\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back, tr.rows);
    }
}
