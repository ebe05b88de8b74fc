//! C ABI for the `mpcc-flow` solver.
//!
//! Problems, builders and reports are opaque handles owned by the caller and
//! released with their `*_free` function. Every fallible call returns an
//! [`MpccStatus`]; on failure [`mpcc_last_error`] describes the cause. No
//! panic crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mpcc_flow::driver::{self, MultiStart, Schedule, SolveReport, Stationarity};
use mpcc_flow::energy::{energy, grad_energy, EnergyParams};
use mpcc_flow::flow::FlowConfig;
use mpcc_flow::model::{ProblemBuilder, ProblemDef, ScalarField};
use mpcc_flow::{regularize, suite, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpccStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    UnknownProblem = 4,
    Infeasible = 5,
    Overflow = 6,
    NonFinite = 7,
    IndexOutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpccStationarity {
    S = 0,
    M = 1,
    C = 2,
    W = 3,
    None = 4,
}

impl From<Stationarity> for MpccStationarity {
    fn from(s: Stationarity) -> Self {
        match s {
            Stationarity::S => Self::S,
            Stationarity::M => Self::M,
            Stationarity::C => Self::C,
            Stationarity::W => Self::W,
            Stationarity::None => Self::None,
        }
    }
}

/// A problem definition.
pub struct MpccProblem(ProblemDef);

/// Collects callbacks until [`mpcc_builder_build`].
pub struct MpccProblemBuilder {
    name: String,
    dim: usize,
    objective: Option<ScalarField>,
    ineq: Vec<ScalarField>,
    eq: Vec<ScalarField>,
    pairs: Vec<(ScalarField, ScalarField)>,
}

/// The reports of one solve or multi-start batch.
pub struct MpccReport(MultiStart);

/// Returns `f(w)`; `w` has `n` entries.
pub type MpccValueFn = Option<unsafe extern "C" fn(w: *const f64, n: usize, user: *mut c_void) -> f64>;
/// Writes `∇f(w)` into `out`; both have `n` entries.
pub type MpccGradFn = Option<unsafe extern "C" fn(w: *const f64, n: usize, out: *mut f64, user: *mut c_void)>;

/// Integration and schedule settings. Non-positive numbers select the
/// library default.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpccSolveOptions {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub grad_tol: f64,
    pub max_steps: usize,
    pub warm_start: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MpccStatus {
    match e {
        Error::DimensionMismatch { .. } => MpccStatus::DimensionMismatch,
        Error::InvalidParameter(_) => MpccStatus::InvalidArgument,
        Error::Infeasible { .. } | Error::InfeasiblePair(_) => MpccStatus::Infeasible,
        Error::Overflow => MpccStatus::Overflow,
        Error::NonFinite => MpccStatus::NonFinite,
        Error::UnknownProblem(_) => MpccStatus::UnknownProblem,
    }
}

fn fail(status: MpccStatus, msg: impl Into<String>) -> MpccStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> MpccStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `body`, converting panics into [`MpccStatus::Panic`].
fn guard(body: impl FnOnce() -> MpccStatus) -> MpccStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(MpccStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `p` must be null or point to `n` readable doubles.
unsafe fn read_slice<'a>(p: *const f64, n: usize) -> Option<&'a [f64]> {
    if n == 0 {
        return Some(&[]);
    }
    if p.is_null() {
        return None;
    }
    // SAFETY: non-null and the caller guarantees n readable elements.
    Some(unsafe { slice::from_raw_parts(p, n) })
}

/// Message of the last failed call on this thread; empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mpcc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mpcc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The NCP function `φ(p, q)`.
#[no_mangle]
pub extern "C" fn mpcc_phi(p: f64, q: f64) -> f64 {
    regularize::phi(p, q)
}

/// Creates a built-in problem (`"mpcc1"`, `"mpcc3"`, ...).
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mpcc_problem_builtin(id: *const c_char, out: *mut *mut MpccProblem) -> MpccStatus {
    guard(|| {
        if id.is_null() || out.is_null() {
            return fail(MpccStatus::NullPointer, "null argument");
        }
        // SAFETY: the caller passes a NUL-terminated string.
        let Ok(id) = unsafe { CStr::from_ptr(id) }.to_str() else {
            return fail(MpccStatus::InvalidArgument, "problem id is not UTF-8");
        };
        match suite::by_id(id) {
            Ok(p) => {
                // SAFETY: out is non-null and writable.
                unsafe { *out = Box::into_raw(Box::new(MpccProblem(p))) };
                MpccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpcc_problem_dim(problem: *const MpccProblem) -> usize {
    // SAFETY: null or a live handle per the contract.
    unsafe { problem.as_ref() }.map_or(0, |p| p.0.dim())
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpcc_problem_free(problem: *mut MpccProblem) {
    if !problem.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate and not yet freed.
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Starts a user problem with `dim` variables. Returns null on a null
/// `name`.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_new(name: *const c_char, dim: usize) -> *mut MpccProblemBuilder {
    if name.is_null() {
        set_error("null name");
        return ptr::null_mut();
    }
    // SAFETY: the caller passes a NUL-terminated string.
    let name = unsafe { CStr::from_ptr(name) }.to_string_lossy().into_owned();
    Box::into_raw(Box::new(MpccProblemBuilder {
        name,
        dim,
        objective: None,
        ineq: Vec::new(),
        eq: Vec::new(),
        pairs: Vec::new(),
    }))
}

/// Callback pair plus user pointer. The solver is single-threaded per call,
/// and the caller promises the callbacks may be invoked from the thread
/// that runs it.
#[derive(Clone, Copy)]
struct Callback {
    value: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    grad: MpccGradFn,
    user: *mut c_void,
}

// SAFETY: the pointer is only handed back to the caller's own callbacks; the
// C contract requires them to be callable from the solving thread.
unsafe impl Send for Callback {}
// SAFETY: as above; the callbacks receive no shared Rust state.
unsafe impl Sync for Callback {}

fn field_of(cb: Callback) -> ScalarField {
    let value = move |w: &[f64]| {
        let c = cb;
        // SAFETY: w is valid for w.len() reads during the call.
        unsafe { (c.value)(w.as_ptr(), w.len(), c.user) }
    };
    match cb.grad {
        Some(_) => ScalarField::new(value, move |w: &[f64], out: &mut [f64]| {
            let c = cb;
            let g = c.grad.expect("checked above");
            // SAFETY: w and out are valid for w.len() elements during the call.
            unsafe { g(w.as_ptr(), w.len(), out.as_mut_ptr(), c.user) }
        }),
        None => ScalarField::without_gradient(value),
    }
}

fn with_builder(
    b: *mut MpccProblemBuilder,
    value: MpccValueFn,
    grad: MpccGradFn,
    user: *mut c_void,
    apply: impl FnOnce(&mut MpccProblemBuilder, ScalarField),
) -> MpccStatus {
    guard(|| {
        // SAFETY: null or a live builder handle per the public contracts.
        let (Some(builder), Some(value)) = (unsafe { b.as_mut() }, value) else {
            return fail(MpccStatus::NullPointer, "null builder or value callback");
        };
        apply(builder, field_of(Callback { value, grad, user }));
        MpccStatus::Ok
    })
}

/// Sets the objective. A null `grad` selects central differences.
///
/// # Safety
/// `builder` must be a live handle; the callbacks must stay valid, and
/// `user` usable by them, for the life of the built problem.
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_objective(
    builder: *mut MpccProblemBuilder,
    value: MpccValueFn,
    grad: MpccGradFn,
    user: *mut c_void,
) -> MpccStatus {
    with_builder(builder, value, grad, user, |b, f| b.objective = Some(f))
}

/// Adds `g(w) <= 0`.
///
/// # Safety
/// As for [`mpcc_builder_objective`].
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_ineq(
    builder: *mut MpccProblemBuilder,
    value: MpccValueFn,
    grad: MpccGradFn,
    user: *mut c_void,
) -> MpccStatus {
    with_builder(builder, value, grad, user, |b, f| b.ineq.push(f))
}

/// Adds `h(w) = 0`.
///
/// # Safety
/// As for [`mpcc_builder_objective`].
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_eq(
    builder: *mut MpccProblemBuilder,
    value: MpccValueFn,
    grad: MpccGradFn,
    user: *mut c_void,
) -> MpccStatus {
    with_builder(builder, value, grad, user, |b, f| b.eq.push(f))
}

/// Adds the pair `0 <= G(w) ⟂ H(w) >= 0`.
///
/// # Safety
/// As for [`mpcc_builder_objective`], for both callback sets.
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_pair(
    builder: *mut MpccProblemBuilder,
    g_value: MpccValueFn,
    g_grad: MpccGradFn,
    g_user: *mut c_void,
    h_value: MpccValueFn,
    h_grad: MpccGradFn,
    h_user: *mut c_void,
) -> MpccStatus {
    guard(|| {
        // SAFETY: null or a live builder handle per the contract.
        let (Some(b), Some(gv), Some(hv)) = (unsafe { builder.as_mut() }, g_value, h_value) else {
            return fail(MpccStatus::NullPointer, "null builder or value callback");
        };
        let g = field_of(Callback { value: gv, grad: g_grad, user: g_user });
        let h = field_of(Callback { value: hv, grad: h_grad, user: h_user });
        b.pairs.push((g, h));
        MpccStatus::Ok
    })
}

/// Validates and builds the problem. The builder is consumed and freed
/// whatever the outcome.
///
/// # Safety
/// `builder` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_build(builder: *mut MpccProblemBuilder, out: *mut *mut MpccProblem) -> MpccStatus {
    guard(|| {
        if builder.is_null() {
            return fail(MpccStatus::NullPointer, "null builder");
        }
        // SAFETY: allocated by mpcc_builder_new and not yet freed.
        let b = unsafe { Box::from_raw(builder) };
        if out.is_null() {
            return fail(MpccStatus::NullPointer, "null output pointer");
        }
        let mut pb: ProblemBuilder = ProblemDef::builder(b.name, b.dim);
        if let Some(f) = b.objective {
            pb = pb.objective(f);
        }
        for g in b.ineq {
            pb = pb.ineq(g);
        }
        for h in b.eq {
            pb = pb.eq(h);
        }
        for (g, h) in b.pairs {
            pb = pb.pair(g, h);
        }
        match pb.build() {
            Ok(p) => {
                // SAFETY: out is non-null and writable.
                unsafe { *out = Box::into_raw(Box::new(MpccProblem(p))) };
                MpccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a builder that was never built.
///
/// # Safety
/// `builder` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mpcc_builder_free(builder: *mut MpccProblemBuilder) {
    if !builder.is_null() {
        // SAFETY: allocated by mpcc_builder_new and not yet freed.
        drop(unsafe { Box::from_raw(builder) });
    }
}

/// Evaluates `E(w, β)` into `value` and, when `grad` is non-null, `∇E` into
/// `grad` (`n` entries).
///
/// # Safety
/// `problem` must be live, `w` readable and `grad` (if non-null) writable
/// for `n` doubles, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_energy(
    problem: *const MpccProblem,
    beta: f64,
    lambda: f64,
    w: *const f64,
    n: usize,
    value: *mut f64,
    grad: *mut f64,
) -> MpccStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let Some(p) = (unsafe { problem.as_ref() }) else {
            return fail(MpccStatus::NullPointer, "null problem");
        };
        // SAFETY: w is readable for n doubles per the contract.
        let Some(w) = (unsafe { read_slice(w, n) }) else {
            return fail(MpccStatus::NullPointer, "null point");
        };
        if value.is_null() {
            return fail(MpccStatus::NullPointer, "null value pointer");
        }
        let params = EnergyParams { beta, lambda };
        let e = match energy(&p.0, params, w) {
            Ok(e) => e,
            Err(e) => return from_error(e),
        };
        if !e.is_finite() {
            return fail(MpccStatus::NonFinite, "energy is not finite at the given point");
        }
        if !grad.is_null() {
            match grad_energy(&p.0, params, w) {
                // SAFETY: grad is writable for n doubles and g.len() == n.
                Ok(g) => unsafe { ptr::copy_nonoverlapping(g.as_ptr(), grad, g.len()) },
                Err(e) => return from_error(e),
            }
        }
        // SAFETY: value is non-null and writable.
        unsafe { *value = e };
        MpccStatus::Ok
    })
}

/// Fills `opts` with the library defaults.
///
/// # Safety
/// `opts` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_solve_options_default(opts: *mut MpccSolveOptions) -> MpccStatus {
    if opts.is_null() {
        return fail(MpccStatus::NullPointer, "null options");
    }
    let d = FlowConfig::default();
    // SAFETY: non-null and writable.
    unsafe {
        *opts = MpccSolveOptions {
            t_end: d.t_end,
            rtol: d.rtol,
            atol: d.atol,
            grad_tol: 0.0,
            max_steps: d.max_steps,
            warm_start: true,
        }
    };
    MpccStatus::Ok
}

fn flow_config(opts: Option<&MpccSolveOptions>) -> (FlowConfig, bool) {
    let mut cfg = FlowConfig::default();
    let Some(o) = opts else { return (cfg, true) };
    let pick = |x: f64, d: f64| if x > 0.0 { x } else { d };
    cfg.t_end = pick(o.t_end, cfg.t_end);
    cfg.rtol = pick(o.rtol, cfg.rtol);
    cfg.atol = pick(o.atol, cfg.atol);
    cfg.grad_tol = (o.grad_tol > 0.0).then_some(o.grad_tol);
    if o.max_steps > 0 {
        cfg.max_steps = o.max_steps;
    }
    // the C side only ever sees the summary, so skip storing every row
    cfg.record_every = usize::MAX;
    (cfg, o.warm_start)
}

/// # Safety
/// Pointers readable for their counts.
unsafe fn schedule_from(
    betas: *const f64,
    n_betas: usize,
    lambdas: *const f64,
    n_lambdas: usize,
    warm_start: bool,
) -> Result<Schedule, MpccStatus> {
    // SAFETY: forwarded contract.
    let (Some(b), Some(l)) = (unsafe { read_slice(betas, n_betas) }, unsafe { read_slice(lambdas, n_lambdas) }) else {
        return Err(fail(MpccStatus::NullPointer, "null schedule array"));
    };
    let s = Schedule { betas: b.to_vec(), lambdas: l.to_vec(), warm_start };
    s.validate().map_err(from_error)?;
    Ok(s)
}

/// Solves from `w0` over the `(β, λ)` schedule. `opts` may be null.
///
/// # Safety
/// `problem` live; `betas`, `lambdas`, `w0` readable for their counts;
/// `opts` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_solve(
    problem: *const MpccProblem,
    betas: *const f64,
    n_betas: usize,
    lambdas: *const f64,
    n_lambdas: usize,
    w0: *const f64,
    n: usize,
    opts: *const MpccSolveOptions,
    out: *mut *mut MpccReport,
) -> MpccStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let (Some(p), false) = (unsafe { problem.as_ref() }, out.is_null()) else {
            return fail(MpccStatus::NullPointer, "null problem or output pointer");
        };
        // SAFETY: null or readable per the contract.
        let (cfg, warm) = flow_config(unsafe { opts.as_ref() });
        // SAFETY: arrays readable for their counts.
        let sched = match unsafe { schedule_from(betas, n_betas, lambdas, n_lambdas, warm) } {
            Ok(s) => s,
            Err(st) => return st,
        };
        // SAFETY: w0 readable for n doubles.
        let Some(w0) = (unsafe { read_slice(w0, n) }) else {
            return fail(MpccStatus::NullPointer, "null initial point");
        };
        match driver::solve(&p.0, &sched, w0, &cfg) {
            Ok(r) => {
                let best = driver::best_index(std::slice::from_ref(&r));
                let rep = MpccReport(MultiStart { reports: vec![r], best });
                // SAFETY: out is non-null and writable.
                unsafe { *out = Box::into_raw(Box::new(rep)) };
                MpccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Solves from `n_starts` points sampled from the problem's box with
/// `seed`. `opts` may be null.
///
/// # Safety
/// As for [`mpcc_solve`].
#[no_mangle]
pub unsafe extern "C" fn mpcc_multi_start(
    problem: *const MpccProblem,
    betas: *const f64,
    n_betas: usize,
    lambdas: *const f64,
    n_lambdas: usize,
    n_starts: usize,
    seed: u64,
    opts: *const MpccSolveOptions,
    out: *mut *mut MpccReport,
) -> MpccStatus {
    guard(|| {
        // SAFETY: null or live per the contract.
        let (Some(p), false) = (unsafe { problem.as_ref() }, out.is_null()) else {
            return fail(MpccStatus::NullPointer, "null problem or output pointer");
        };
        // SAFETY: null or readable per the contract.
        let (cfg, warm) = flow_config(unsafe { opts.as_ref() });
        // SAFETY: arrays readable for their counts.
        let sched = match unsafe { schedule_from(betas, n_betas, lambdas, n_lambdas, warm) } {
            Ok(s) => s,
            Err(st) => return st,
        };
        match driver::multi_start(&p.0, &sched, n_starts, seed, &cfg) {
            Ok(ms) => {
                // SAFETY: out is non-null and writable.
                unsafe { *out = Box::into_raw(Box::new(MpccReport(ms))) };
                MpccStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of solves in the report, 0 for null.
///
/// # Safety
/// `report` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_count(report: *const MpccReport) -> usize {
    // SAFETY: null or live per the contract.
    unsafe { report.as_ref() }.map_or(0, |r| r.0.reports.len())
}

/// Index of the best solve, or -1 when none qualifies.
///
/// # Safety
/// `report` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_best(report: *const MpccReport) -> i64 {
    // SAFETY: null or live per the contract.
    unsafe { report.as_ref() }.and_then(|r| r.0.best).map_or(-1, |b| b as i64)
}

fn entry<'a>(report: *const MpccReport, index: usize) -> Result<&'a SolveReport, MpccStatus> {
    // SAFETY: callers forward a null-or-live handle.
    let r = unsafe { report.as_ref() }.ok_or_else(|| fail(MpccStatus::NullPointer, "null report"))?;
    r.0.reports.get(index).ok_or_else(|| fail(MpccStatus::IndexOutOfRange, format!("no solve at index {index}")))
}

/// Copies the final point of solve `index` into `out` (`n` entries, which
/// must equal the problem dimension).
///
/// # Safety
/// `report` live; `out` writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_point(report: *const MpccReport, index: usize, out: *mut f64, n: usize) -> MpccStatus {
    guard(|| {
        let r = match entry(report, index) {
            Ok(r) => r,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(MpccStatus::NullPointer, "null output pointer");
        }
        if n != r.final_point.len() {
            return fail(MpccStatus::DimensionMismatch, format!("expected {} entries, got {n}", r.final_point.len()));
        }
        // SAFETY: out is writable for n == len doubles.
        unsafe { ptr::copy_nonoverlapping(r.final_point.as_ptr(), out, n) };
        MpccStatus::Ok
    })
}

/// Final objective value of solve `index`.
///
/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_objective(report: *const MpccReport, index: usize, out: *mut f64) -> MpccStatus {
    guard(|| match entry(report, index) {
        Ok(_) if out.is_null() => fail(MpccStatus::NullPointer, "null output pointer"),
        // SAFETY: out is non-null and writable.
        Ok(r) => unsafe {
            *out = r.final_objective;
            MpccStatus::Ok
        },
        Err(s) => s,
    })
}

/// Stationarity class of solve `index`.
///
/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_stationarity(
    report: *const MpccReport,
    index: usize,
    out: *mut MpccStationarity,
) -> MpccStatus {
    guard(|| match entry(report, index) {
        Ok(_) if out.is_null() => fail(MpccStatus::NullPointer, "null output pointer"),
        // SAFETY: out is non-null and writable.
        Ok(r) => unsafe {
            *out = r.stationarity.into();
            MpccStatus::Ok
        },
        Err(s) => s,
    })
}

/// Whether solve `index` stopped at a rest point that is MPCC feasible.
///
/// # Safety
/// `report` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_converged(report: *const MpccReport, index: usize, out: *mut bool) -> MpccStatus {
    guard(|| match entry(report, index) {
        Ok(_) if out.is_null() => fail(MpccStatus::NullPointer, "null output pointer"),
        // SAFETY: out is non-null and writable.
        Ok(r) => unsafe {
            *out = r.converged;
            MpccStatus::Ok
        },
        Err(s) => s,
    })
}

/// The whole report as JSON. Free with [`mpcc_string_free`]; null on
/// failure.
///
/// # Safety
/// `report` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_json(report: *const MpccReport) -> *mut c_char {
    let mut result = ptr::null_mut();
    let status = guard(|| {
        // SAFETY: null or live per the contract.
        let Some(r) = (unsafe { report.as_ref() }) else {
            return fail(MpccStatus::NullPointer, "null report");
        };
        match serde_json::to_string(&r.0).map(CString::new) {
            Ok(Ok(s)) => {
                result = s.into_raw();
                MpccStatus::Ok
            }
            _ => fail(MpccStatus::InvalidArgument, "report could not be serialized"),
        }
    });
    if status == MpccStatus::Ok {
        result
    } else {
        ptr::null_mut()
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpcc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mpcc_report_free(report: *mut MpccReport) {
    if !report.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate and not yet freed.
        drop(unsafe { Box::from_raw(report) });
    }
}
