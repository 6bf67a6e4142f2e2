//! C ABI for `fracstab`.
//!
//! Every fallible function returns a [`FracstabStatus`] and writes its result
//! through an out-pointer. On failure, [`fracstab_last_error`] describes the
//! error on the calling thread. Handles are opaque and must be released with
//! the matching `*_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracstab::approx::{rational_approximation, RationalApprox};
use fracstab::general::{analyze_general, GeneralVerdict};
use fracstab::matrix::CoefMatrix;
use fracstab::order::{OrderVector, Rational};
use fracstab::problem::{parse_problem, ForcingSpec, ProblemFile};
use fracstab::pseudospectrum::{gershgorin_prescreen, sigma_min_shifted};
use fracstab::simulate::{solve_pi_trapezoidal_with, HistoryMethod, Problem, Thinning, Trajectory};
use fracstab::spectrum::{analyze_rational, StabilityReport, Verdict};
use fracstab::system::SystemSpec;
use fracstab::Error;
use num_complex::Complex64;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FracstabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SingularMatrix = 4,
    HypothesisFailed = 5,
    LimitExceeded = 6,
    NumericFailure = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FracstabVerdict {
    Stable = 0,
    Unstable = 1,
    Marginal = 2,
    Inapplicable = 3,
}

impl From<GeneralVerdict> for FracstabVerdict {
    fn from(v: GeneralVerdict) -> Self {
        match v {
            GeneralVerdict::Stable => FracstabVerdict::Stable,
            GeneralVerdict::Unstable => FracstabVerdict::Unstable,
            GeneralVerdict::Marginal => FracstabVerdict::Marginal,
            GeneralVerdict::Inapplicable => FracstabVerdict::Inapplicable,
        }
    }
}

/// Constants of the rational approximation. `delta1` is infinite when `R = 1`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FracstabConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
    pub ln_rho: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta: f64,
    pub eps: f64,
}

/// A matrix with its order vector, optionally with forcing and a
/// simulation block from a problem file.
pub struct FracstabSystem {
    spec: SystemSpec,
    file: Option<ProblemFile>,
}

/// Result of [`fracstab_analyze`].
pub struct FracstabReport {
    verdict: FracstabVerdict,
    lambda_min: f64,
    rational: Option<StabilityReport>,
}

pub struct FracstabApprox {
    inner: RationalApprox,
}

pub struct FracstabTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> FracstabStatus {
    match e {
        Error::Parse(_) => FracstabStatus::ParseError,
        Error::SingularMatrix => FracstabStatus::SingularMatrix,
        Error::HypothesisFailed { .. } => FracstabStatus::HypothesisFailed,
        Error::TooManyStates { .. } | Error::DegreeTooLarge { .. } => FracstabStatus::LimitExceeded,
        Error::ConvergenceFailure { .. }
        | Error::NewtonDivergence { .. }
        | Error::NonMonic
        | Error::ZeroDegree
        | Error::InsufficientTail { .. } => FracstabStatus::NumericFailure,
        _ => FracstabStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> FracstabStatus {
    set_error(e.to_string());
    status_of(&e)
}

/// Run `f`, turning panics into [`FracstabStatus::Panic`].
fn guard(f: impl FnOnce() -> FracstabStatus) -> FracstabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            FracstabStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return FracstabStatus::NullPointer;
        })+
    };
}

fn boxed<T>(out: *mut *mut T, value: T) -> FracstabStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    FracstabStatus::Ok
}

unsafe fn matrix_from_raw(n: usize, data: *const f64) -> Result<CoefMatrix, Error> {
    let entries = std::slice::from_raw_parts(data, n * n);
    let rows: Vec<Vec<f64>> = entries.chunks(n).map(<[f64]>::to_vec).collect();
    CoefMatrix::from_decimal_rows(&rows)
}

fn rational_parts(r: &Rational) -> Option<(i64, i64)> {
    Some((r.numer().to_i64()?, r.denom().to_i64()?))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fracstab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fracstab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a system from a row-major `n x n` matrix and exact orders
/// `num[i] / den[i]`. Matrix entries are read as the shortest decimals
/// that round to them.
#[no_mangle]
pub unsafe extern "C" fn fracstab_system_new(
    n: usize,
    matrix: *const f64,
    order_num: *const i64,
    order_den: *const i64,
    out: *mut *mut FracstabSystem,
) -> FracstabStatus {
    guard(|| {
        non_null!(matrix, order_num, order_den, out);
        if n == 0 {
            return fail(Error::EmptyOrders);
        }
        let num = std::slice::from_raw_parts(order_num, n);
        let den = std::slice::from_raw_parts(order_den, n);
        let fr: Vec<(i64, i64)> = num.iter().copied().zip(den.iter().copied()).collect();
        if fr.iter().any(|&(_, d)| d == 0) {
            return fail(Error::InvalidProblem("order with zero denominator".into()));
        }
        let built = matrix_from_raw(n, matrix)
            .and_then(|a| OrderVector::from_fractions(&fr).and_then(|o| SystemSpec::new(a, o)));
        match built {
            Ok(spec) => boxed(out, FracstabSystem { spec, file: None }),
            Err(e) => fail(e),
        }
    })
}

/// Build a system with real (floating-point) orders.
#[no_mangle]
pub unsafe extern "C" fn fracstab_system_new_real(
    n: usize,
    matrix: *const f64,
    orders: *const f64,
    out: *mut *mut FracstabSystem,
) -> FracstabStatus {
    guard(|| {
        non_null!(matrix, orders, out);
        if n == 0 {
            return fail(Error::EmptyOrders);
        }
        let values = std::slice::from_raw_parts(orders, n);
        let built = matrix_from_raw(n, matrix)
            .and_then(|a| OrderVector::from_reals(values).and_then(|o| SystemSpec::new(a, o)));
        match built {
            Ok(spec) => boxed(out, FracstabSystem { spec, file: None }),
            Err(e) => fail(e),
        }
    })
}

/// Build a system from the text of a JSON problem file.
#[no_mangle]
pub unsafe extern "C" fn fracstab_system_from_json(json: *const c_char, out: *mut *mut FracstabSystem) -> FracstabStatus {
    guard(|| {
        non_null!(json, out);
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(Error::Parse("input is not valid UTF-8".into()));
        };
        match parse_problem(text) {
            Ok(file) => boxed(
                out,
                FracstabSystem {
                    spec: file.system.clone(),
                    file: Some(file),
                },
            ),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_system_free(system: *mut FracstabSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_system_dim(system: *const FracstabSystem) -> usize {
    system.as_ref().map_or(0, |s| s.spec.n())
}

/// Decide stability. Exact orders use the companion test; real orders use
/// the rational approximation with accuracy `eps` (`eps <= 0` or NaN picks
/// the default). `tol` is the relative tolerance of the sector test.
#[no_mangle]
pub unsafe extern "C" fn fracstab_analyze(
    system: *const FracstabSystem,
    tol: f64,
    eps: f64,
    out: *mut *mut FracstabReport,
) -> FracstabStatus {
    guard(|| {
        non_null!(system, out);
        let spec = &(*system).spec;
        if !(tol.is_finite() && tol >= 0.0) {
            return fail(Error::InvalidProblem(format!("tolerance {tol} must be finite and >= 0")));
        }
        let result = if spec.orders().is_exact() {
            analyze_rational(spec, tol).map(|r| FracstabReport {
                verdict: GeneralVerdict::from(r.verdict).into(),
                lambda_min: f64::NAN,
                rational: Some(r),
            })
        } else {
            let eps = (eps > 0.0).then_some(eps);
            analyze_general(spec, eps, tol).map(|g| FracstabReport {
                verdict: g.verdict.into(),
                lambda_min: g.lambda_min,
                rational: g.rational_report,
            })
        };
        match result {
            Ok(r) => boxed(out, r),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_report_free(report: *mut FracstabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_report_verdict(report: *const FracstabReport) -> FracstabVerdict {
    report.as_ref().map_or(FracstabVerdict::Inapplicable, |r| r.verdict)
}

/// `lambda_min(-(A + A^T))` for real-order analyses, NaN otherwise.
#[no_mangle]
pub unsafe extern "C" fn fracstab_report_lambda_min(report: *const FracstabReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.lambda_min)
}

/// Smallest `|arg|` over the companion roots; NaN when no companion test ran.
#[no_mangle]
pub unsafe extern "C" fn fracstab_report_min_abs_arg(report: *const FracstabReport) -> f64 {
    report
        .as_ref()
        .and_then(|r| r.rational.as_ref())
        .map_or(f64::NAN, |r| r.min_abs_arg)
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_report_margin(report: *const FracstabReport) -> f64 {
    report
        .as_ref()
        .and_then(|r| r.rational.as_ref())
        .map_or(f64::NAN, |r| r.margin)
}

/// Companion degree, 0 when no companion test ran.
#[no_mangle]
pub unsafe extern "C" fn fracstab_report_degree(report: *const FracstabReport) -> usize {
    report
        .as_ref()
        .and_then(|r| r.rational.as_ref())
        .map_or(0, |r| r.degree)
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_report_gamma(
    report: *const FracstabReport,
    num: *mut i64,
    den: *mut i64,
) -> FracstabStatus {
    guard(|| {
        non_null!(report, num, den);
        let Some(r) = (*report).rational.as_ref() else {
            set_error("report has no companion test");
            return FracstabStatus::InvalidArgument;
        };
        match r.gamma_rational().as_ref().and_then(rational_parts) {
            Some((p, q)) => {
                *num = p;
                *den = q;
                FracstabStatus::Ok
            }
            None => {
                set_error(format!("gamma = {} does not fit in 64-bit integers", r.gamma));
                FracstabStatus::LimitExceeded
            }
        }
    })
}

/// Copy the companion roots into `re` and `im` (each of length `capacity`).
/// `count` receives the number of roots; with too small a buffer nothing is
/// copied and `BufferTooSmall` is returned.
#[no_mangle]
pub unsafe extern "C" fn fracstab_report_roots(
    report: *const FracstabReport,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> FracstabStatus {
    guard(|| {
        non_null!(report, count);
        let roots: &[Complex64] = (*report).rational.as_ref().map_or(&[], |r| &r.roots);
        *count = roots.len();
        if roots.is_empty() {
            return FracstabStatus::Ok;
        }
        non_null!(re, im);
        if capacity < roots.len() {
            set_error(format!("buffer holds {capacity} roots, need {}", roots.len()));
            return FracstabStatus::BufferTooSmall;
        }
        for (k, z) in roots.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        FracstabStatus::Ok
    })
}

/// Report as a JSON string; release with [`fracstab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fracstab_report_to_json(report: *const FracstabReport, out: *mut *mut c_char) -> FracstabStatus {
    guard(|| {
        non_null!(report, out);
        let r = &*report;
        let value = serde_json::json!({
            "verdict": match r.verdict {
                FracstabVerdict::Stable => "stable",
                FracstabVerdict::Unstable => "unstable",
                FracstabVerdict::Marginal => "marginal",
                FracstabVerdict::Inapplicable => "inapplicable",
            },
            "lambda_min": r.lambda_min.is_finite().then_some(r.lambda_min),
            "report": r.rational,
        });
        match CString::new(value.to_string()) {
            Ok(s) => {
                *out = s.into_raw();
                FracstabStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                FracstabStatus::InvalidArgument
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rational approximation of the system's orders with accuracy `eps`.
#[no_mangle]
pub unsafe extern "C" fn fracstab_approx_new(
    system: *const FracstabSystem,
    eps: f64,
    out: *mut *mut FracstabApprox,
) -> FracstabStatus {
    guard(|| {
        non_null!(system, out);
        let spec = &(*system).spec;
        match rational_approximation(spec.matrix(), spec.orders(), eps) {
            Ok(inner) => boxed(out, FracstabApprox { inner }),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_approx_free(approx: *mut FracstabApprox) {
    if !approx.is_null() {
        drop(Box::from_raw(approx));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_approx_constants(
    approx: *const FracstabApprox,
    out: *mut FracstabConstants,
) -> FracstabStatus {
    guard(|| {
        non_null!(approx, out);
        let c = &(*approx).inner.constants;
        *out = FracstabConstants {
            a: c.a,
            b: c.b,
            c: c.c,
            r: c.r,
            ln_rho: c.ln_rho,
            delta1: c.delta1,
            delta2: c.delta2,
            delta3: c.delta3,
            delta: c.delta,
            eps: c.eps,
        };
        FracstabStatus::Ok
    })
}

/// Approximating order `index` as `num / den`.
#[no_mangle]
pub unsafe extern "C" fn fracstab_approx_beta(
    approx: *const FracstabApprox,
    index: usize,
    num: *mut i64,
    den: *mut i64,
) -> FracstabStatus {
    guard(|| {
        non_null!(approx, num, den);
        let beta = (*approx).inner.beta_rationals();
        let Some(b) = beta.get(index) else {
            set_error(format!("index {index} out of range for {} orders", beta.len()));
            return FracstabStatus::InvalidArgument;
        };
        match rational_parts(b) {
            Some((p, q)) => {
                *num = p;
                *den = q;
                FracstabStatus::Ok
            }
            None => {
                set_error(format!("{b} does not fit in 64-bit integers"));
                FracstabStatus::LimitExceeded
            }
        }
    })
}

/// `sigma_min(diag(z^alpha) - A)` at `z = re + i im`.
#[no_mangle]
pub unsafe extern "C" fn fracstab_sigma_min(system: *const FracstabSystem, re: f64, im: f64, out: *mut f64) -> FracstabStatus {
    guard(|| {
        non_null!(system, out);
        if !(re.is_finite() && im.is_finite()) {
            return fail(Error::InvalidProblem("z must be finite".into()));
        }
        let spec = &(*system).spec;
        *out = sigma_min_shifted(spec.a_f64(), &spec.orders().values(), Complex64::new(re, im));
        FracstabStatus::Ok
    })
}

/// Sets `stable` to 1 when every row is strictly diagonally dominant with a
/// negative diagonal (which implies stability for all orders), else 0.
#[no_mangle]
pub unsafe extern "C" fn fracstab_prescreen(system: *const FracstabSystem, stable: *mut i32) -> FracstabStatus {
    guard(|| {
        non_null!(system, stable);
        *stable = i32::from(gershgorin_prescreen((*system).spec.a_f64()) == Some(Verdict::Stable));
        FracstabStatus::Ok
    })
}

fn thinning(per_decade: usize) -> Thinning {
    if per_decade == 0 {
        Thinning::All
    } else {
        Thinning::Log(per_decade)
    }
}

/// Simulate `D^alpha x = A x (+ forcing from the problem file)` from `x0`.
/// `per_decade = 0` keeps every step, otherwise that many log-spaced
/// samples per decade.
#[no_mangle]
pub unsafe extern "C" fn fracstab_simulate(
    system: *const FracstabSystem,
    x0: *const f64,
    t_final: f64,
    h: f64,
    per_decade: usize,
    out: *mut *mut FracstabTrajectory,
) -> FracstabStatus {
    guard(|| {
        non_null!(system, x0, out);
        let sys = &*system;
        let x0 = std::slice::from_raw_parts(x0, sys.spec.n()).to_vec();
        let forcing = sys.file.as_ref().map_or(ForcingSpec::None, |f| f.forcing.clone());
        let run = Problem::new(&sys.spec, forcing.to_forcing(), x0, t_final, h)
            .and_then(|p| solve_pi_trapezoidal_with(&p, thinning(per_decade), HistoryMethod::Fft));
        match run {
            Ok(inner) => boxed(out, FracstabTrajectory { inner }),
            Err(e) => fail(e),
        }
    })
}

/// Simulate with the `simulation` block of the problem file the system was
/// built from.
#[no_mangle]
pub unsafe extern "C" fn fracstab_simulate_file(
    system: *const FracstabSystem,
    per_decade: usize,
    out: *mut *mut FracstabTrajectory,
) -> FracstabStatus {
    guard(|| {
        non_null!(system, out);
        let Some(file) = (*system).file.as_ref() else {
            return fail(Error::InvalidProblem("system was not built from a problem file".into()));
        };
        let run = file
            .problem(None, None)
            .and_then(|p| solve_pi_trapezoidal_with(&p, thinning(per_decade), HistoryMethod::Fft));
        match run {
            Ok(inner) => boxed(out, FracstabTrajectory { inner }),
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fracstab_trajectory_free(traj: *mut FracstabTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored samples.
#[no_mangle]
pub unsafe extern "C" fn fracstab_trajectory_len(traj: *const FracstabTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// Steps at which Newton did not reach its tolerance.
#[no_mangle]
pub unsafe extern "C" fn fracstab_trajectory_newton_failures(traj: *const FracstabTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.newton_failures.len())
}

/// Time and state of sample `index`; `state` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn fracstab_trajectory_sample(
    traj: *const FracstabTrajectory,
    index: usize,
    t: *mut f64,
    state: *mut f64,
) -> FracstabStatus {
    guard(|| {
        non_null!(traj, t, state);
        let tr = &(*traj).inner;
        if index >= tr.len() {
            set_error(format!("sample {index} out of range for {} samples", tr.len()));
            return FracstabStatus::InvalidArgument;
        }
        *t = tr.times[index];
        let x = &tr.states[index];
        ptr::copy_nonoverlapping(x.as_ptr(), state, x.len());
        FracstabStatus::Ok
    })
}
