//! C interface to `lia-core`.
//!
//! Every fallible call returns a [`LiaStatus`]; on failure
//! [`lia_last_error`] describes the most recent error on the calling thread.
//! Handles are opaque and must be released with their `_free` function.
//! Strings returned as `char *` are owned by the caller and released with
//! [`lia_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lia_core::config::ExperimentConfig;
use lia_core::experiment::{run_experiment, run_reports, ExperimentError};
use lia_core::fd::{fd_run_backward, FdBcKind, FdRunOptions};
use lia_core::grid::{ChebyshevGrid, UniformGrid};
use lia_core::report::RunReport;
use lia_core::selfsim::{closed_form_a3, extract_asymptotics, integrate_frenet_profile, FrameProfile, SelfSimilarParams};
use lia_core::spectral::{spectral_run_backward, SpectralBcKind, SpectralRunOptions};
use lia_core::{Metric, Vec3};

pub const LIA_METRIC_EUCLIDEAN: i32 = 1;
pub const LIA_METRIC_HYPERBOLIC: i32 = -1;

pub const LIA_BC_PROJECTED: i32 = 0;
pub const LIA_BC_SELF_SIMILARITY: i32 = 1;
pub const LIA_BC_RADIATION: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Exact self-similar frame profile on a uniform grid.
pub struct LiaProfile {
    profile: FrameProfile,
}

/// Reports of one run; two-stage runs hold two.
pub struct LiaReport {
    reports: Vec<RunReport>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("no interior nul"));
}

struct Failure(LiaStatus, String);

impl From<lia_core::Error> for Failure {
    fn from(e: lia_core::Error) -> Self {
        let status = match e {
            lia_core::Error::InvalidParameter(_)
            | lia_core::Error::InvalidGrid(_)
            | lia_core::Error::TooFewNodes { .. }
            | lia_core::Error::BadLength(_) => LiaStatus::InvalidArgument,
            _ => LiaStatus::Solver,
        };
        Failure(status, e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let status = match e {
            ExperimentError::Config(_) => LiaStatus::Config,
            ExperimentError::Solver { .. } => LiaStatus::Solver,
            ExperimentError::Io { .. } => LiaStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(LiaStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LiaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LiaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LiaStatus::Panic
        }
    }
}

fn metric(code: i32) -> Result<Metric, Failure> {
    match code {
        LIA_METRIC_EUCLIDEAN => Ok(Metric::Euclidean),
        LIA_METRIC_HYPERBOLIC => Ok(Metric::Hyperbolic),
        other => Err(invalid(format!("unknown metric code {other}"))),
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(LiaStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{name} is not UTF-8")))
}

fn write_vec3(v: Vec3, out: *mut f64) {
    // SAFETY: callers check `out` and promise room for three values.
    unsafe { ptr::copy_nonoverlapping(v.0.as_ptr(), out, 3) };
}

/// Message of the last failed call on this thread (empty if none).
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lia_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn lia_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `A3 = exp(-sign c0^2 pi / 2)`; NaN for an unknown metric code.
#[no_mangle]
pub extern "C" fn lia_closed_form_a3(c0: f64, metric_code: i32) -> f64 {
    metric(metric_code).map(|m| closed_form_a3(c0, m)).unwrap_or(f64::NAN)
}

/// Integrate the exact profile at time `t` on `[-length, length]` with spacing `ds`.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn lia_profile_new(c0: f64, t: f64, metric_code: i32, length: f64, ds: f64, out: *mut *mut LiaProfile) -> LiaStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = SelfSimilarParams::new(c0, t, metric(metric_code)?)?;
        let profile = integrate_frenet_profile(p, length, ds)?;
        *out = Box::into_raw(Box::new(LiaProfile { profile }));
        Ok(())
    })
}

/// Number of grid nodes; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or come from [`lia_profile_new`].
#[no_mangle]
pub unsafe extern "C" fn lia_profile_len(handle: *const LiaProfile) -> usize {
    handle.as_ref().map(|h| h.profile.frames.len()).unwrap_or(0)
}

/// Copy nodes into `s` and tangents (x, y, z interleaved) into `tangents`.
///
/// # Safety
/// `s` needs room for `len` values and `tangents` for `3 len`.
#[no_mangle]
pub unsafe extern "C" fn lia_profile_tangents(handle: *const LiaProfile, s: *mut f64, tangents: *mut f64, len: usize) -> LiaStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(s, "s")?;
        non_null(tangents, "tangents")?;
        let h = &*handle;
        let n = h.profile.frames.len();
        if len < n {
            return Err(Failure(LiaStatus::BufferTooSmall, format!("need {n} nodes, buffer holds {len}")));
        }
        for (i, f) in h.profile.frames.iter().enumerate() {
            *s.add(i) = h.profile.grid.node(i);
            write_vec3(f.t, tangents.add(3 * i));
        }
        Ok(())
    })
}

/// Limit directions `A-`, `A+` read off the profile ends (needs `length >= 20`).
///
/// # Safety
/// `a_minus` and `a_plus` each need room for three values.
#[no_mangle]
pub unsafe extern "C" fn lia_profile_asymptotics(handle: *const LiaProfile, a_minus: *mut f64, a_plus: *mut f64) -> LiaStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(a_minus, "a_minus")?;
        non_null(a_plus, "a_plus")?;
        let k = extract_asymptotics(&(*handle).profile)?;
        write_vec3(k.a_minus, a_minus);
        write_vec3(k.a_plus, a_plus);
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`lia_profile_new`], and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lia_profile_free(handle: *mut LiaProfile) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn boxed_report(reports: Vec<RunReport>, out: *mut *mut LiaReport) {
    // SAFETY: checked non-null by every caller.
    unsafe { *out = Box::into_raw(Box::new(LiaReport { reports })) };
}

/// Backward finite-difference run from the exact profile at `t = 1`.
/// `asymptotic_bc` selects the two-term boundary instead of the fixed one.
///
/// # Safety
/// `probes` must hold `n_probes` values (may be null when `n_probes` is 0);
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn lia_fd_run_backward(
    c0: f64,
    metric_code: i32,
    length: f64,
    ds: f64,
    dt: f64,
    t_end: f64,
    asymptotic_bc: bool,
    probes: *const f64,
    n_probes: usize,
    out: *mut *mut LiaReport,
) -> LiaStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = SelfSimilarParams::new(c0, 1.0, metric(metric_code)?)?;
        let grid = UniformGrid::with_spacing(length, ds)?;
        let mut opts = FdRunOptions::new(dt, t_end);
        opts.probes = probe_slice(probes, n_probes)?;
        let bc = if asymptotic_bc { FdBcKind::AsymptoticSecondOrder } else { FdBcKind::FixedFirstOrder };
        boxed_report(vec![fd_run_backward(p, grid, bc, &opts)?.report], out);
        Ok(())
    })
}

/// Backward spectral run from the exact profile at `t = 1`.
/// `refine_threshold <= 0` keeps the degree fixed.
///
/// # Safety
/// As for [`lia_fd_run_backward`].
#[no_mangle]
pub unsafe extern "C" fn lia_spectral_run_backward(
    c0: f64,
    metric_code: i32,
    length: f64,
    degree: usize,
    dt: f64,
    t_end: f64,
    bc_code: i32,
    refine_threshold: f64,
    probes: *const f64,
    n_probes: usize,
    out: *mut *mut LiaReport,
) -> LiaStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = SelfSimilarParams::new(c0, 1.0, metric(metric_code)?)?;
        let bc = match bc_code {
            LIA_BC_PROJECTED => SpectralBcKind::ProjectedSecondOrder,
            LIA_BC_SELF_SIMILARITY => SpectralBcKind::SelfSimilarity,
            LIA_BC_RADIATION => SpectralBcKind::Radiation,
            other => return Err(invalid(format!("unknown boundary code {other}"))),
        };
        let grid = ChebyshevGrid::new(length, degree)?;
        let mut opts = SpectralRunOptions::new(dt, t_end);
        opts.refine_threshold = (refine_threshold > 0.0).then_some(refine_threshold);
        opts.probes = probe_slice(probes, n_probes)?;
        boxed_report(vec![spectral_run_backward(p, grid, bc, &opts)?.report], out);
        Ok(())
    })
}

unsafe fn probe_slice(probes: *const f64, n: usize) -> Result<Vec<f64>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(probes, "probes")?;
    Ok(std::slice::from_raw_parts(probes, n).to_vec())
}

/// Run a configuration in the flat `key = value` format. With a non-null
/// `out_dir` the artifacts are written there as well.
///
/// # Safety
/// `config` must be a nul-terminated string, `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn lia_run_config(config: *const c_char, out_dir: *const c_char, out: *mut *mut LiaReport) -> LiaStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = ExperimentConfig::parse(read_str(config, "config")?).map_err(ExperimentError::from)?;
        let reports = if out_dir.is_null() {
            run_reports(&cfg)?
        } else {
            run_experiment(&cfg, Path::new(read_str(out_dir, "out_dir")?))?.reports
        };
        boxed_report(reports.into_iter().map(|(_, r)| r).collect(), out);
        Ok(())
    })
}

/// Number of stages held (1, or 2 for two-stage runs); 0 for null.
///
/// # Safety
/// `handle` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn lia_report_stages(handle: *const LiaReport) -> usize {
    handle.as_ref().map(|h| h.reports.len()).unwrap_or(0)
}

unsafe fn stage<'a>(handle: *const LiaReport, index: usize) -> Result<&'a RunReport, Failure> {
    non_null(handle, "handle")?;
    let report = &*handle;
    report.reports.get(index).ok_or_else(|| invalid(format!("no stage {index}")))
}

/// Final time, step count, and number of probes of one stage.
///
/// # Safety
/// `handle` must be a live report handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lia_report_summary(
    handle: *const LiaReport,
    index: usize,
    final_t: *mut f64,
    steps: *mut u64,
    n_probes: *mut usize,
) -> LiaStatus {
    guard(|| {
        non_null(final_t, "final_t")?;
        non_null(steps, "steps")?;
        non_null(n_probes, "n_probes")?;
        let r = stage(handle, index)?;
        *final_t = r.final_t;
        *steps = r.steps;
        *n_probes = r.probes.len();
        Ok(())
    })
}

/// Time, curvature at `s = 0`, and max curvature error of one probe.
///
/// # Safety
/// `handle` must be a live report handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lia_report_probe(
    handle: *const LiaReport,
    index: usize,
    probe: usize,
    t: *mut f64,
    c_origin: *mut f64,
    max_error: *mut f64,
) -> LiaStatus {
    guard(|| {
        non_null(t, "t")?;
        non_null(c_origin, "c_origin")?;
        non_null(max_error, "max_error")?;
        let r = stage(handle, index)?;
        let p = r.probes.get(probe).ok_or_else(|| invalid(format!("no probe {probe}")))?;
        *t = p.t;
        *c_origin = p.c_origin;
        *max_error = p.error.max_abs;
        Ok(())
    })
}

/// JSON of one stage; release with [`lia_string_free`]. Null on error.
///
/// # Safety
/// `handle` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn lia_report_json(handle: *const LiaReport, index: usize) -> *mut c_char {
    let mut json = ptr::null_mut();
    let status = guard(|| {
        let text = stage(handle, index)?.to_json();
        json = CString::new(text).map_err(|_| invalid("report contains nul"))?.into_raw();
        Ok(())
    });
    if status == LiaStatus::Ok {
        json
    } else {
        ptr::null_mut()
    }
}

/// # Safety
/// `handle` must be null or a live report handle, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lia_report_free(handle: *mut LiaReport) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lia_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
