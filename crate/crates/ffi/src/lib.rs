//! C ABI over the `aggdiff` crate.
//!
//! Every entry point returns an [`AggdiffStatus`]; on failure the message is
//! available from [`aggdiff_last_error`] on the calling thread. Handles are
//! opaque and must be released with their `_free` function. Panics never
//! cross the boundary; they are reported as [`AggdiffStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aggdiff::inequalities::{gn_solve, hls_solve};
use aggdiff::norms::sobolev_seminorm;
use aggdiff::solver::stable_dt;
use aggdiff::{Error, Field, Grid, RunConfig, SolverState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Run configuration handle.
pub struct AggdiffConfig {
    inner: RunConfig,
}

/// Time-stepping handle.
pub struct AggdiffSolver {
    state: SolverState,
    cfl: f64,
    dt_cap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AggdiffStatus {
    match e {
        Error::Config { .. } | Error::ConfigValue { .. } => AggdiffStatus::Config,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) | Error::Format { .. } => {
            AggdiffStatus::Io
        }
        Error::StepTooLarge { .. }
        | Error::BoundaryMass { .. }
        | Error::Positivity { .. }
        | Error::NonFinite(_)
        | Error::Degenerate(_)
        | Error::IncompleteSweep(_) => AggdiffStatus::Numerical,
        _ => AggdiffStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> AggdiffStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> AggdiffStatus {
    set_error(format!("null pointer: {what}"));
    AggdiffStatus::NullPointer
}

/// Runs `f`, converting a panic into [`AggdiffStatus::Panic`].
fn guard(f: impl FnOnce() -> AggdiffStatus) -> AggdiffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            AggdiffStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, AggdiffStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        AggdiffStatus::InvalidArgument
    })
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

macro_rules! arg {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn aggdiff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Writes a configuration with every default applied to `*out`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_config_default(out: *mut *mut AggdiffConfig) -> AggdiffStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let h = Box::new(AggdiffConfig {
            inner: RunConfig::default(),
        });
        *out = Box::into_raw(h);
        AggdiffStatus::Ok
    })
}

/// Parses a `key=value` configuration file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_config_from_file(
    path: *const c_char,
    out: *mut *mut AggdiffConfig,
) -> AggdiffStatus {
    guard(|| {
        let path = arg!(str_arg(path, "path"));
        if out.is_null() {
            return null("out");
        }
        let cfg = tri!(aggdiff::parse_config(Path::new(path)));
        *out = Box::into_raw(Box::new(AggdiffConfig { inner: cfg }));
        AggdiffStatus::Ok
    })
}

/// Sets one key. The configuration is left unchanged on failure.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_config_set(
    cfg: *mut AggdiffConfig,
    key: *const c_char,
    value: *const c_char,
) -> AggdiffStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return null("cfg");
        };
        let key = arg!(str_arg(key, "key"));
        let value = arg!(str_arg(value, "value"));
        let mut next = cfg.inner.clone();
        tri!(next.set(key, value));
        tri!(next.validate());
        cfg.inner = next;
        AggdiffStatus::Ok
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_config_free(cfg: *mut AggdiffConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds a solver at `t = 0` from the configuration's initial profile.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_new(
    cfg: *const AggdiffConfig,
    out: *mut *mut AggdiffSolver,
) -> AggdiffStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return null("cfg");
        };
        if out.is_null() {
            return null("out");
        }
        let c = &cfg.inner;
        tri!(c.validate());
        let t_star = tri!(c.resolved_t_star());
        let mut state = tri!(SolverState::new(tri!(c.initial_field()), c.eps));
        state.set_positivity_tol(c.positivity_tol);
        let dt_cap = if t_star > 0.0 {
            t_star / c.sample_count as f64
        } else {
            f64::INFINITY
        };
        *out = Box::into_raw(Box::new(AggdiffSolver {
            state,
            cfl: c.cfl,
            dt_cap,
        }));
        AggdiffStatus::Ok
    })
}

/// Takes one step of the CFL-limited size and writes it to `*dt_out` if
/// non-null.
///
/// # Safety
/// `solver` must be a live handle; `dt_out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_step(
    solver: *mut AggdiffSolver,
    dt_out: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        let Some(s) = solver.as_mut() else {
            return null("solver");
        };
        let dt = stable_dt(&s.state, s.cfl, s.dt_cap);
        tri!(s.state.advance(dt));
        if !dt_out.is_null() {
            *dt_out = dt;
        }
        AggdiffStatus::Ok
    })
}

/// Steps until the solver time equals `t`, shortening the last step.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_advance_to(
    solver: *mut AggdiffSolver,
    t: f64,
) -> AggdiffStatus {
    guard(|| {
        let Some(s) = solver.as_mut() else {
            return null("solver");
        };
        if !t.is_finite() || t < s.state.time() {
            set_error(format!(
                "target time {t} precedes the solver time {}",
                s.state.time()
            ));
            return AggdiffStatus::InvalidArgument;
        }
        while s.state.time() < t {
            let dt = stable_dt(&s.state, s.cfl, s.dt_cap).min(t - s.state.time());
            tri!(s.state.advance(dt));
        }
        AggdiffStatus::Ok
    })
}

/// # Safety
/// `solver` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_time(
    solver: *const AggdiffSolver,
    out: *mut f64,
) -> AggdiffStatus {
    guard(|| match (solver.as_ref(), out.is_null()) {
        (Some(s), false) => {
            *out = s.state.time();
            AggdiffStatus::Ok
        }
        (None, _) => null("solver"),
        (_, true) => null("out"),
    })
}

/// Conserved mass of the current solution.
///
/// # Safety
/// `solver` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_mass(
    solver: *const AggdiffSolver,
    out: *mut f64,
) -> AggdiffStatus {
    guard(|| match (solver.as_ref(), out.is_null()) {
        (Some(s), false) => {
            *out = s.state.mass();
            AggdiffStatus::Ok
        }
        (None, _) => null("solver"),
        (_, true) => null("out"),
    })
}

/// Number of samples in the field, `n^dim`.
///
/// # Safety
/// `solver` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_len(
    solver: *const AggdiffSolver,
    out: *mut usize,
) -> AggdiffStatus {
    guard(|| match (solver.as_ref(), out.is_null()) {
        (Some(s), false) => {
            *out = s.state.field().values().len();
            AggdiffStatus::Ok
        }
        (None, _) => null("solver"),
        (_, true) => null("out"),
    })
}

/// Copies the field, row-major in 2D, into `buf`, which holds `len` doubles.
///
/// # Safety
/// `solver` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_copy_field(
    solver: *const AggdiffSolver,
    buf: *mut f64,
    len: usize,
) -> AggdiffStatus {
    guard(|| {
        let Some(s) = solver.as_ref() else {
            return null("solver");
        };
        if buf.is_null() {
            return null("buf");
        }
        let v = s.state.field().values();
        if len != v.len() {
            set_error(format!("buffer holds {len} values, field has {}", v.len()));
            return AggdiffStatus::InvalidArgument;
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, len);
        AggdiffStatus::Ok
    })
}

/// Releases a solver. Null is ignored.
///
/// # Safety
/// `solver` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_solver_free(solver: *mut AggdiffSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Integrates the configuration to its final time and writes the observable
/// series as CSV.
///
/// # Safety
/// `cfg` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_run_to_csv(
    cfg: *const AggdiffConfig,
    path: *const c_char,
) -> AggdiffStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return null("cfg");
        };
        let path = arg!(str_arg(path, "path"));
        let out = tri!(aggdiff::run(&cfg.inner));
        tri!(aggdiff::io::write_series_csv(&out.series, Path::new(path)));
        AggdiffStatus::Ok
    })
}

/// Solves the Gagliardo-Nirenberg exponent relation for `r`; writes
/// `INFINITY` when `1/r = 0`.
///
/// # Safety
/// `r_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_gn_solve(
    dim: usize,
    m: usize,
    beta: usize,
    p: f64,
    q: f64,
    theta: f64,
    r_out: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        if r_out.is_null() {
            return null("r_out");
        }
        *r_out = tri!(gn_solve(dim, m, beta, p, q, theta)).r;
        AggdiffStatus::Ok
    })
}

/// Solves the Hardy-Littlewood-Sobolev exponent relation for `q`.
///
/// # Safety
/// `q_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_hls_solve(
    dim: usize,
    p: f64,
    lambda: f64,
    q_out: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        if q_out.is_null() {
            return null("q_out");
        }
        *q_out = tri!(hls_solve(dim, p, lambda)).q;
        AggdiffStatus::Ok
    })
}

/// Homogeneous Sobolev seminorm of order `m` of samples on the periodic box
/// `[-L/2, L/2)^dim` with `n` points per axis.
///
/// # Safety
/// `values` must be valid for `len` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aggdiff_sobolev_seminorm(
    dim: usize,
    n: usize,
    extent: f64,
    values: *const f64,
    len: usize,
    m: usize,
    out: *mut f64,
) -> AggdiffStatus {
    guard(|| {
        if values.is_null() {
            return null("values");
        }
        if out.is_null() {
            return null("out");
        }
        if m > aggdiff::spectral::MAX_DERIVATIVE_ORDER {
            set_error(format!("derivative order {m} too large"));
            return AggdiffStatus::InvalidArgument;
        }
        let grid = tri!(Grid::new(dim, n, extent));
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let field = tri!(Field::new(grid, data));
        *out = sobolev_seminorm(&field, m);
        AggdiffStatus::Ok
    })
}
