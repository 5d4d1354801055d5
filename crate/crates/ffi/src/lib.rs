//! C ABI over `roa-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`RoaStatus`]; on failure a message is kept per thread and can be read
//! with [`roa_last_error_message`]. Output pointers are only written on
//! success, except the required count reported with `BufferTooSmall`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use roa_core::grid::{signed_distance_circle, Grid2D, ScalarField};
use roa_core::hjsolver::{solve, SolveConfig};
use roa_core::netmodel::{
    gershgorin_certify, linear_jacobian, reduced_equilibria, DynamicsSpec, EquilibriumKind,
    ReducedSystem, Topology,
};
use roa_core::oracle::{
    classify_basin, consensus_target, convergence_time, ConvergenceTime, OracleParams,
};
use roa_core::roa::sublevel_mask;
use roa_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoaEquilibriumKind {
    StableNode = 0,
    UnstableNode = 1,
    Saddle = 2,
    NonHyperbolic = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoaConvergence {
    Reached = 0,
    Timeout = 1,
    Diverged = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoaEquilibrium {
    pub li: f64,
    pub lbar: f64,
    pub kind: RoaEquilibriumKind,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoaGridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Opaque reduced system.
pub struct RoaSystem {
    sys: ReducedSystem,
}

/// Opaque set of level-set snapshots.
pub struct RoaSolution {
    snapshots: Vec<ScalarField>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RoaStatus {
    match e {
        Error::NonFinite { .. } => RoaStatus::Numerical,
        _ => RoaStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (RoaStatus, String)>) -> RoaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RoaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside roa".into());
            RoaStatus::Panic
        }
    }
}

fn core<T>(r: roa_core::Result<T>) -> Result<T, (RoaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RoaStatus, String) {
    (RoaStatus::NullPointer, format!("{what} is null"))
}

fn too_small(need: usize, cap: usize) -> (RoaStatus, String) {
    (RoaStatus::BufferTooSmall, format!("buffer holds {cap} entries, {need} needed"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (RoaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn boxed_system(sys: roa_core::Result<ReducedSystem>, out: *mut *mut RoaSystem) -> Result<(), (RoaStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let sys = core(sys)?;
    // SAFETY: `out` is non-null and the caller guarantees it is writable.
    unsafe { *out = Box::into_raw(Box::new(RoaSystem { sys })) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn roa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Linear preset `f = beta (1 - l)`, `g = gamma x`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn roa_system_new_linear(w: f64, beta: f64, gamma: f64, out: *mut *mut RoaSystem) -> RoaStatus {
    guard(|| boxed_system(DynamicsSpec::linear(beta, gamma).and_then(|d| ReducedSystem::new(w, d)), out))
}

/// Nonlinear preset `f = l (1 - l)`, `g = x^2 - 0.1 x`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn roa_system_new_nonlinear(w: f64, out: *mut *mut RoaSystem) -> RoaStatus {
    guard(|| boxed_system(ReducedSystem::new(w, DynamicsSpec::nonlinear()), out))
}

/// Polynomial dynamics with ascending coefficients.
///
/// # Safety
/// `f` and `g` must point to `nf` and `ng` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn roa_system_new_poly(
    w: f64,
    f: *const f64,
    nf: usize,
    g: *const f64,
    ng: usize,
    out: *mut *mut RoaSystem,
) -> RoaStatus {
    guard(|| {
        let f = slice(f, nf, "f")?.to_vec();
        let g = slice(g, ng, "g")?.to_vec();
        boxed_system(DynamicsSpec::new(f, g).and_then(|d| ReducedSystem::new(w, d)), out)
    })
}

/// # Safety
/// `sys` must be null or a handle from `roa_system_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn roa_system_free(sys: *mut RoaSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle; `dli` and `dlbar` must be writable.
#[no_mangle]
pub unsafe extern "C" fn roa_reduced_rhs(
    sys: *const RoaSystem,
    li: f64,
    lbar: f64,
    dli: *mut f64,
    dlbar: *mut f64,
) -> RoaStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if dli.is_null() || dlbar.is_null() {
            return Err(null("output"));
        }
        let (a, b) = s.sys.rhs(li, lbar);
        *dli = a;
        *dlbar = b;
        Ok(())
    })
}

/// Equilibria with both coordinates in `[lo, hi]`. `count` receives the
/// number found; `BufferTooSmall` is returned when it exceeds `cap`.
///
/// # Safety
/// `sys` must be a live handle, `buf` must hold `cap` entries (or be null
/// with `cap == 0`) and `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn roa_equilibria(
    sys: *const RoaSystem,
    lo: f64,
    hi: f64,
    buf: *mut RoaEquilibrium,
    cap: usize,
    count: *mut usize,
) -> RoaStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let eq = core(reduced_equilibria(&s.sys, lo, hi))?;
        *count = eq.len();
        if eq.len() > cap {
            return Err(too_small(eq.len(), cap));
        }
        if !eq.is_empty() && buf.is_null() {
            return Err(null("buf"));
        }
        for (k, e) in eq.iter().enumerate() {
            let kind = match e.kind {
                EquilibriumKind::StableNode => RoaEquilibriumKind::StableNode,
                EquilibriumKind::UnstableNode => RoaEquilibriumKind::UnstableNode,
                EquilibriumKind::Saddle => RoaEquilibriumKind::Saddle,
                EquilibriumKind::NonHyperbolic => RoaEquilibriumKind::NonHyperbolic,
            };
            *buf.add(k) = RoaEquilibrium { li: e.li, lbar: e.lbar, kind };
        }
        Ok(())
    })
}

fn grid_of(spec: *const RoaGridSpec) -> Result<Grid2D, (RoaStatus, String)> {
    // SAFETY: callers pass a pointer checked by the public entry points' contract.
    let g = unsafe { spec.as_ref() }.ok_or_else(|| null("grid"))?;
    core(Grid2D::new(g.xmin, g.xmax, g.ymin, g.ymax, g.nx, g.ny))
}

/// Level-set solve from a circle of `radius` around `(cx, cy)`, keeping one
/// snapshot per entry of `snapshots` (ascending, last equal to `t_final`).
///
/// # Safety
/// `sys` and `grid` must be valid, `snapshots` must hold `n_snapshots`
/// doubles and `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn roa_solve(
    sys: *const RoaSystem,
    grid: *const RoaGridSpec,
    cx: f64,
    cy: f64,
    radius: f64,
    t_final: f64,
    cfl: f64,
    snapshots: *const f64,
    n_snapshots: usize,
    out: *mut *mut RoaSolution,
) -> RoaStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = grid_of(grid)?;
        let times = slice(snapshots, n_snapshots, "snapshots")?.to_vec();
        let cfg = core(SolveConfig::new(t_final, cfl, times))?;
        let init = core(signed_distance_circle(&g, cx, cy, radius))?;
        let snapshots = core(solve(&g, &s.sys, &init, &cfg))?;
        *out = Box::into_raw(Box::new(RoaSolution { snapshots }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from `roa_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn roa_solution_free(sol: *mut RoaSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of snapshots, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn roa_solution_snapshot_count(sol: *const RoaSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.snapshots.len())
}

unsafe fn snapshot<'a>(sol: *const RoaSolution, k: usize) -> Result<&'a ScalarField, (RoaStatus, String)> {
    let s = sol.as_ref().ok_or_else(|| null("solution"))?;
    s.snapshots.get(k).ok_or_else(|| {
        (RoaStatus::InvalidArgument, format!("snapshot {k} out of range ({} available)", s.snapshots.len()))
    })
}

/// Area of the zero-sublevel set of snapshot `k`.
///
/// # Safety
/// `sol` must be a live handle and `area` writable.
#[no_mangle]
pub unsafe extern "C" fn roa_solution_area(sol: *const RoaSolution, k: usize, area: *mut f64) -> RoaStatus {
    guard(|| {
        let f = snapshot(sol, k)?;
        if area.is_null() {
            return Err(null("area"));
        }
        *area = core(sublevel_mask(f, 0.0))?.area();
        Ok(())
    })
}

/// Interior values of snapshot `k`, row-major with `y` outer (`nx * ny`).
///
/// # Safety
/// `sol` must be a live handle and `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn roa_solution_values(sol: *const RoaSolution, k: usize, buf: *mut f64, cap: usize) -> RoaStatus {
    guard(|| {
        let f = snapshot(sol, k)?;
        let n = f.grid().interior_len();
        if cap < n {
            return Err(too_small(n, cap));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, v) in f.interior().enumerate() {
            *buf.add(i) = v;
        }
        Ok(())
    })
}

/// Zero-sublevel mask of snapshot `k` as 0/1 bytes, same layout as values.
///
/// # Safety
/// `sol` must be a live handle and `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn roa_solution_mask(sol: *const RoaSolution, k: usize, buf: *mut u8, cap: usize) -> RoaStatus {
    guard(|| {
        let f = snapshot(sol, k)?;
        let m = core(sublevel_mask(f, 0.0))?;
        let n = m.as_slice().len();
        if cap < n {
            return Err(too_small(n, cap));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        for (i, &b) in m.as_slice().iter().enumerate() {
            *buf.add(i) = b as u8;
        }
        Ok(())
    })
}

/// Oracle basin of the nearest stable consensus state, with default
/// integration parameters, as 0/1 bytes row-major with `y` outer.
///
/// # Safety
/// `sys` and `grid` must be valid and `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn roa_classify_basin(
    sys: *const RoaSystem,
    grid: *const RoaGridSpec,
    buf: *mut u8,
    cap: usize,
) -> RoaStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let g = grid_of(grid)?;
        if cap < g.interior_len() {
            return Err(too_small(g.interior_len(), cap));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let (cx, cy) = g.point(g.nx() / 2, g.ny() / 2);
        let target = core(consensus_target(&s.sys, (cx, cy)))?;
        let basin = core(classify_basin(&g, &s.sys, &target, &OracleParams::default()))?;
        for (i, &b) in basin.mask.as_slice().iter().enumerate() {
            *buf.add(i) = b as u8;
        }
        Ok(())
    })
}

/// Time for the tracked node to settle within `eps`. `time` is written
/// only when `kind` is `Reached`.
///
/// # Safety
/// `sys` must be a live handle; `time` and `kind` must be writable.
#[no_mangle]
pub unsafe extern "C" fn roa_convergence_time(
    sys: *const RoaSystem,
    li: f64,
    lbar: f64,
    eps: f64,
    time: *mut f64,
    kind: *mut RoaConvergence,
) -> RoaStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        if time.is_null() || kind.is_null() {
            return Err(null("output"));
        }
        match core(convergence_time((li, lbar), &s.sys, eps))? {
            ConvergenceTime::Reached(t) => {
                *time = t;
                *kind = RoaConvergence::Reached;
            }
            ConvergenceTime::Timeout => *kind = RoaConvergence::Timeout,
            ConvergenceTime::Diverged => *kind = RoaConvergence::Diverged,
        }
        Ok(())
    })
}

/// Gershgorin certificate for the linear network Jacobian.
/// `weights[j * n + i]` is the weight of edge `j -> i`.
///
/// # Safety
/// `weights` must hold `n * n` doubles; `certified` and `margin` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn roa_certify_linear(
    n: usize,
    weights: *const f64,
    beta: f64,
    gamma: f64,
    certified: *mut bool,
    margin: *mut f64,
) -> RoaStatus {
    guard(|| {
        if certified.is_null() || margin.is_null() {
            return Err(null("output"));
        }
        let len = n.checked_mul(n).ok_or_else(|| (RoaStatus::InvalidArgument, "n too large".to_string()))?;
        let w = slice(weights, len, "weights")?.to_vec();
        if !(beta > 0.0) || !(gamma > 0.0) {
            return Err((RoaStatus::InvalidArgument, "beta and gamma must be positive".into()));
        }
        let top = core(Topology::new(n, w))?;
        let cert = gershgorin_certify(&core(linear_jacobian(&top, beta, gamma))?);
        *certified = cert.certified;
        *margin = cert.margin;
        Ok(())
    })
}
