//! C ABI over `hmcf`.
//!
//! Objects are opaque heap handles created by `hmcf_*_new`-style functions and
//! released with the matching `hmcf_*_free`. Every fallible call returns an
//! [`HmcfStatus`]; on failure `hmcf_last_error_message` describes the error
//! raised most recently on the calling thread. Point arguments are arrays of
//! `n` doubles, matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use hmcf::barriers::{BarrierEval, BarrierKind, BarrierSpec};
use hmcf::calculus::{envelopes, mcf_operator};
use hmcf::config::ExperimentConfig;
use hmcf::solver::{Evolution, Solver, SolverConfig};
use hmcf::{Error, GroupSpec};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    ConfigError = 5,
    Instability = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcfBarrierKind {
    Cylinder = 0,
    Gauge = 1,
    EuclidBall = 2,
    SqrtGauge = 3,
}

impl From<HmcfBarrierKind> for BarrierKind {
    fn from(k: HmcfBarrierKind) -> Self {
        match k {
            HmcfBarrierKind::Cylinder => BarrierKind::Cylinder,
            HmcfBarrierKind::Gauge => BarrierKind::Gauge,
            HmcfBarrierKind::EuclidBall => BarrierKind::EuclidBall,
            HmcfBarrierKind::SqrtGauge => BarrierKind::SqrtGauge,
        }
    }
}

/// A step-two group.
pub struct HmcfGroup {
    inner: GroupSpec,
}

/// A catalog barrier on a group.
pub struct HmcfBarrier {
    inner: BarrierEval,
}

/// A validated experiment configuration.
pub struct HmcfConfig {
    inner: SolverConfig,
}

/// The snapshots and extinction time of a finished evolution.
pub struct HmcfRun {
    inner: Evolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HmcfStatus {
    match e {
        Error::Dimension(_) => HmcfStatus::DimensionMismatch,
        Error::Singular(_) => HmcfStatus::Singular,
        Error::Config(_) => HmcfStatus::ConfigError,
        Error::Instability { .. } => HmcfStatus::Instability,
        _ => HmcfStatus::InvalidArgument,
    }
}

fn fail(status: HmcfStatus, msg: &str) -> HmcfStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> HmcfStatus
where
    F: FnOnce() -> Result<(), HmcfStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmcfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(HmcfStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: hmcf::Result<T>) -> Result<T, HmcfStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), HmcfStatus> {
    if p.is_null() {
        Err(fail(HmcfStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn view<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], HmcfStatus> {
    non_null(p, what)?;
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn view_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], HmcfStatus> {
    non_null(p, what)?;
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn group_ref<'a>(g: *const HmcfGroup) -> Result<&'a GroupSpec, HmcfStatus> {
    non_null(g, "group")?;
    Ok(&(*g).inner)
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), HmcfStatus> {
    non_null(out, what)?;
    *out = value;
    Ok(())
}

/// Message of the last error on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn hmcf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a group from `n - m` structure matrices stored consecutively,
/// each `m x m` row-major (`b_len = (n - m) m^2`).
///
/// # Safety
/// `b` must point to `b_len` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_new(
    m: usize,
    n: usize,
    b: *const f64,
    b_len: usize,
    out: *mut *mut HmcfGroup,
) -> HmcfStatus {
    guard(|| {
        non_null(out, "out")?;
        if n <= m || b_len != (n - m) * m * m {
            return Err(fail(
                HmcfStatus::DimensionMismatch,
                &format!("expected {} structure entries for m = {m}, n = {n}, got {b_len}", n.saturating_sub(m) * m * m),
            ));
        }
        let data = view(b, b_len, "b")?;
        let mats = data.chunks(m * m).map(|c| DMatrix::from_row_slice(m, m, c)).collect();
        let g = lift(GroupSpec::new(m, n, mats))?;
        *out = Box::into_raw(Box::new(HmcfGroup { inner: g }));
        Ok(())
    })
}

/// The first Heisenberg group (`m = 2`, `n = 3`).
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_heisenberg(out: *mut *mut HmcfGroup) -> HmcfStatus {
    guard(|| put(out, Box::into_raw(Box::new(HmcfGroup { inner: GroupSpec::heisenberg() })), "out"))
}

/// # Safety
/// `g` must come from a group constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_free(g: *mut HmcfGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live group; `m`, `n` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_dims(g: *const HmcfGroup, m: *mut usize, n: *mut usize) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        put(m, g.m(), "m")?;
        put(n, g.n(), "n")
    })
}

/// `out = x o y`.
///
/// # Safety
/// `x`, `y`, `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_compose(
    g: *const HmcfGroup,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        let n = g.n();
        let r = lift(g.compose(view(x, n, "x")?, view(y, n, "y")?))?;
        view_mut(out, n, "out")?.copy_from_slice(r.as_slice());
        Ok(())
    })
}

/// `out = x^-1`.
///
/// # Safety
/// `x`, `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_inverse(g: *const HmcfGroup, x: *const f64, out: *mut f64) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        let n = g.n();
        let r = g.inverse(view(x, n, "x")?);
        view_mut(out, n, "out")?.copy_from_slice(r.as_slice());
        Ok(())
    })
}

/// `out = delta_lambda(x)`, `lambda > 0`.
///
/// # Safety
/// `x`, `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_dilate(
    g: *const HmcfGroup,
    lambda: f64,
    x: *const f64,
    out: *mut f64,
) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        let n = g.n();
        let r = lift(g.dilate(lambda, view(x, n, "x")?))?;
        view_mut(out, n, "out")?.copy_from_slice(r.as_slice());
        Ok(())
    })
}

/// Homogeneous norm `(|x_h|^4 + |x_v|^2)^(1/4)`.
///
/// # Safety
/// `x` must hold `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_norm(g: *const HmcfGroup, x: *const f64, out: *mut f64) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        put(out, g.homogeneous_norm(view(x, g.n(), "x")?), "out")
    })
}

/// Gauge distance `|x^-1 o y|`.
///
/// # Safety
/// `x`, `y` must each hold `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_group_distance(
    g: *const HmcfGroup,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> HmcfStatus {
    guard(|| {
        let g = group_ref(g)?;
        let n = g.n();
        put(out, lift(g.gauge_distance(view(x, n, "x")?, view(y, n, "y")?))?, "out")
    })
}

/// `F(q, A) = -tr A + q.Aq / |q|^2`; `Singular` when `q = 0`.
///
/// # Safety
/// `q` must hold `m` doubles, `a` `m * m` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_mcf_operator(m: usize, q: *const f64, a: *const f64, out: *mut f64) -> HmcfStatus {
    guard(|| {
        let q = DVector::from_column_slice(view(q, m, "q")?);
        let a = DMatrix::from_row_slice(m, m, view(a, m * m, "a")?);
        match mcf_operator(&q, &a) {
            Some(v) => put(out, v, "out"),
            None => Err(fail(HmcfStatus::Singular, "q = 0")),
        }
    })
}

/// `F_*(0, A)` and `F^*(0, A)` of a symmetric `m x m` matrix.
///
/// # Safety
/// `a` must hold `m * m` doubles; `lower`, `upper` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_envelopes(m: usize, a: *const f64, lower: *mut f64, upper: *mut f64) -> HmcfStatus {
    guard(|| {
        if m == 0 {
            return Err(fail(HmcfStatus::InvalidArgument, "m must be positive"));
        }
        let a = DMatrix::from_row_slice(m, m, view(a, m * m, "a")?);
        let e = envelopes(&a);
        put(lower, e.lower, "lower")?;
        put(upper, e.upper, "upper")
    })
}

/// Catalog barrier `ct - U(x) + r`.
///
/// # Safety
/// `g` must be a live group; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_barrier_new(
    g: *const HmcfGroup,
    kind: HmcfBarrierKind,
    c: f64,
    r: f64,
    out: *mut *mut HmcfBarrier,
) -> HmcfStatus {
    guard(|| {
        non_null(out, "out")?;
        let g = group_ref(g)?;
        let b = lift(BarrierEval::new(BarrierSpec::new(kind.into(), c, r), g))?;
        *out = Box::into_raw(Box::new(HmcfBarrier { inner: b }));
        Ok(())
    })
}

/// # Safety
/// `b` must come from `hmcf_barrier_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hmcf_barrier_free(b: *mut HmcfBarrier) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Closed-form and recomputed `u_t + F(Xu, X^2 u)` at `(x, t)`; `Singular` at
/// characteristic points.
///
/// # Safety
/// `x` must hold `n` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_barrier_operator(
    b: *const HmcfBarrier,
    x: *const f64,
    t: f64,
    closed_form: *mut f64,
    computed: *mut f64,
) -> HmcfStatus {
    guard(|| {
        non_null(b, "barrier")?;
        let b = &(*b).inner;
        let x = view(x, b.group().n(), "x")?;
        let cf = b.operator_closed_form(x);
        let cp = lift(b.operator_computed(x, t))?;
        match (cf, cp) {
            (Some(a), Some(v)) => {
                put(closed_form, a, "closed_form")?;
                put(computed, v, "computed")
            }
            _ => Err(fail(HmcfStatus::Singular, "characteristic point")),
        }
    })
}

/// Extinction time `-r/c` of the barrier's zero level set.
///
/// # Safety
/// `b` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_barrier_extinction_time(b: *const HmcfBarrier, out: *mut f64) -> HmcfStatus {
    guard(|| {
        non_null(b, "barrier")?;
        put(out, lift((*b).inner.extinction_time())?, "out")
    })
}

/// Parses a TOML experiment configuration.
///
/// # Safety
/// `text` must be a NUL-terminated UTF-8 string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_from_toml(text: *const c_char, out: *mut *mut HmcfConfig) -> HmcfStatus {
    guard(|| {
        non_null(text, "text")?;
        non_null(out, "out")?;
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(HmcfStatus::ConfigError, "configuration is not valid UTF-8"))?;
        let cfg = lift(ExperimentConfig::from_toml_str(s).and_then(|c| c.solver_config()))?;
        *out = Box::into_raw(Box::new(HmcfConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `c` must come from `hmcf_config_from_toml` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_free(c: *mut HmcfConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Runs the configured evolution to `t_end` or extinction.
///
/// # Safety
/// `cfg` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_evolve(cfg: *const HmcfConfig, out: *mut *mut HmcfRun) -> HmcfStatus {
    guard(|| {
        non_null(cfg, "config")?;
        non_null(out, "out")?;
        let evo = lift(Solver::new((*cfg).inner.clone()).and_then(|s| s.evolve()))?;
        *out = Box::into_raw(Box::new(HmcfRun { inner: evo }));
        Ok(())
    })
}

/// # Safety
/// `r` must come from `hmcf_evolve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hmcf_run_free(r: *mut HmcfRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of snapshots and values per snapshot.
///
/// # Safety
/// `r` must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_run_shape(r: *const HmcfRun, snapshots: *mut usize, nodes: *mut usize) -> HmcfStatus {
    guard(|| {
        non_null(r, "run")?;
        let evo = &(*r).inner;
        put(snapshots, evo.snapshots.len(), "snapshots")?;
        put(nodes, evo.snapshots.first().map_or(0, |s| s.len()), "nodes")
    })
}

/// `has_extinction` is set to 1 and `time` to the extinction time when the
/// run went extinct, otherwise `has_extinction` is 0.
///
/// # Safety
/// `r` must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_run_extinction_time(
    r: *const HmcfRun,
    has_extinction: *mut i32,
    time: *mut f64,
) -> HmcfStatus {
    guard(|| {
        non_null(r, "run")?;
        match (*r).inner.extinction_time {
            Some(t) => {
                put(has_extinction, 1, "has_extinction")?;
                put(time, t, "time")
            }
            None => put(has_extinction, 0, "has_extinction"),
        }
    })
}

/// Copies snapshot `index` (row-major node order) into `values` and its time into `time`.
///
/// # Safety
/// `values` must hold `len` doubles; `time` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_run_snapshot(
    r: *const HmcfRun,
    index: usize,
    values: *mut f64,
    len: usize,
    time: *mut f64,
) -> HmcfStatus {
    guard(|| {
        non_null(r, "run")?;
        let evo = &(*r).inner;
        let Some(s) = evo.snapshots.get(index) else {
            return Err(fail(
                HmcfStatus::InvalidArgument,
                &format!("snapshot {index} out of range ({} available)", evo.snapshots.len()),
            ));
        };
        if len != s.len() {
            return Err(fail(HmcfStatus::DimensionMismatch, &format!("buffer holds {len} values, snapshot has {}", s.len())));
        }
        view_mut(values, len, "values")?.copy_from_slice(s.values());
        put(time, s.time(), "time")
    })
}
