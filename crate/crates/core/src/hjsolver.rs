//! Backward-reachable-set level-set solver for the planar reduced system.
//!
//! The terminal-value problem `v_t + min(0, grad v . h) = 0`, `v(x, 0) = v0`
//! is marched in pseudo-time `tau = -t`, where it reads
//! `v_tau = min(0, grad v . h)`. Equivalently `v_tau + H(grad v) = 0` with
//! `H(p) = -min(0, p . h)`, which is the Hamiltonian the Lax-Friedrichs flux
//! below is built for. Snapshots are tagged with `t = -tau`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{fill_ghost_slice, Grid2D, ScalarField, GHOST};
use crate::netmodel::ReducedSystem;
use crate::weno::{differences, weno_x_row, weno_y_row, y_differences_into};

pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissipation {
    #[default]
    GlobalLaxFriedrichs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    t_final: f64,
    cfl: f64,
    snapshot_times: Vec<f64>,
    dissipation: Dissipation,
}

impl SolveConfig {
    pub fn new(t_final: f64, cfl: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::invalid(format!("t_final must be positive, got {t_final}")));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if snapshot_times.is_empty() {
            return Err(Error::invalid("snapshot_times must not be empty"));
        }
        let mut prev = 0.0;
        for &t in &snapshot_times {
            if !(t > prev) || t > t_final {
                return Err(Error::invalid(
                    "snapshot_times must be strictly ascending within (0, t_final]",
                ));
            }
            prev = t;
        }
        if *snapshot_times.last().unwrap() != t_final {
            return Err(Error::invalid("the last snapshot time must equal t_final"));
        }
        Ok(SolveConfig {
            t_final,
            cfl,
            snapshot_times,
            dissipation: Dissipation::GlobalLaxFriedrichs,
        })
    }

    /// Horizon 6 with snapshots at 1, 2, 4, 6 and CFL 0.5.
    pub fn default_experiment() -> Self {
        SolveConfig::new(6.0, DEFAULT_CFL, vec![1.0, 2.0, 4.0, 6.0]).expect("static config")
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn cfl(&self) -> f64 {
        self.cfl
    }
    pub fn snapshot_times(&self) -> &[f64] {
        &self.snapshot_times
    }
    pub fn dissipation(&self) -> Dissipation {
        self.dissipation
    }
}

/// Reduced vector field sampled on every padded grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid2D,
    h1: Vec<f64>,
    h2: Vec<f64>,
    pub alpha_x: f64,
    pub alpha_y: f64,
}

impl VelocityField {
    /// Builds a field from explicit padded arrays; alphas are their exact maxima.
    pub fn from_components(grid: Grid2D, h1: Vec<f64>, h2: Vec<f64>) -> Result<Self> {
        if h1.len() != grid.padded_len() || h2.len() != grid.padded_len() {
            return Err(Error::DimensionMismatch {
                expected: grid.padded_len(),
                got: h1.len().min(h2.len()),
            });
        }
        if h1.iter().chain(&h2).any(|v| !v.is_finite()) {
            return Err(Error::invalid("velocity field must be finite"));
        }
        let amax = |h: &[f64]| h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(VelocityField {
            alpha_x: amax(&h1),
            alpha_y: amax(&h2),
            grid,
            h1,
            h2,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn h1(&self) -> &[f64] {
        &self.h1
    }
    pub fn h2(&self) -> &[f64] {
        &self.h2
    }

    /// Components at interior indices.
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        let k = self.grid.interior_idx(i, j);
        (self.h1[k], self.h2[k])
    }
}

/// `h1 = f(x) + w g(y - x)`, `h2 = f(y)` with `x = l_i`, `y = lbar`.
pub fn build_velocity(grid: &Grid2D, sys: &ReducedSystem) -> Result<VelocityField> {
    let n = grid.padded_len();
    let (mut h1, mut h2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..grid.padded_ny() {
        let y = grid.y_at(j);
        for i in 0..grid.stride() {
            let (a, b) = sys.rhs(grid.x_at(i), y);
            h1.push(a);
            h2.push(b);
        }
    }
    VelocityField::from_components(*grid, h1, h2)
}

/// `min(0, p h1 + q h2)`.
#[inline(always)]
pub fn hamiltonian_value(p: f64, q: f64, h1: f64, h2: f64) -> f64 {
    (p * h1 + q * h2).min(0.0)
}

/// Global Lax-Friedrichs flux for the pseudo-time Hamiltonian
/// `H(p, q) = -min(0, p h1 + q h2)`.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
pub fn numerical_flux(
    pm: f64,
    pp: f64,
    qm: f64,
    qp: f64,
    h1: f64,
    h2: f64,
    alpha_x: f64,
    alpha_y: f64,
) -> f64 {
    -hamiltonian_value(0.5 * (pm + pp), 0.5 * (qm + qp), h1, h2)
        - 0.5 * alpha_x * (pp - pm)
        - 0.5 * alpha_y * (qp - qm)
}

struct RowScratch {
    xdiff: Vec<f64>,
    pm: Vec<f64>,
    pp: Vec<f64>,
    qm: Vec<f64>,
    qp: Vec<f64>,
}

impl RowScratch {
    fn new(g: &Grid2D) -> Self {
        RowScratch {
            xdiff: vec![0.0; g.stride() - 1],
            pm: vec![0.0; g.nx()],
            pp: vec![0.0; g.nx()],
            qm: vec![0.0; g.nx()],
            qp: vec![0.0; g.nx()],
        }
    }
}

struct RowInputs<'a> {
    g: &'a Grid2D,
    j: usize,
    v: &'a [f64],
    inv_dx: f64,
    ydiff: &'a [f64],
    h1: &'a [f64],
    h2: &'a [f64],
    ax: f64,
    ay: f64,
}

#[inline(always)]
fn operator_row_generic(r: &RowInputs, sc: &mut RowScratch, out: &mut [f64]) {
    differences(r.v, r.inv_dx, &mut sc.xdiff);
    weno_x_row(&sc.xdiff, &mut sc.pm, &mut sc.pp);
    weno_y_row(r.g, r.ydiff, r.j, &mut sc.qm, &mut sc.qp);
    let n = out.len();
    let (pm, pp, qm, qp) = (&sc.pm[..n], &sc.pp[..n], &sc.qm[..n], &sc.qp[..n]);
    let (h1, h2) = (&r.h1[..n], &r.h2[..n]);
    for k in 0..n {
        out[k] = -numerical_flux(pm[k], pp[k], qm[k], qp[k], h1[k], h2[k], r.ax, r.ay);
    }
}

// Same arithmetic with wider vectors; IEEE results are identical to the
// generic path because no operations are fused.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn operator_row_avx512(r: &RowInputs, sc: &mut RowScratch, out: &mut [f64]) {
    operator_row_generic(r, sc, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn operator_row_avx2(r: &RowInputs, sc: &mut RowScratch, out: &mut [f64]) {
    operator_row_generic(r, sc, out)
}

fn operator_row(r: &RowInputs, sc: &mut RowScratch, out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: AVX-512F support was just detected.
            return unsafe { operator_row_avx512(r, sc, out) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: AVX2 support was just detected.
            return unsafe { operator_row_avx2(r, sc, out) };
        }
    }
    operator_row_generic(r, sc, out)
}

/// Evaluates `L(v) = -H_hat` with ghost refill; reusable across stages.
struct HjOperator<'a> {
    grid: Grid2D,
    vel: &'a VelocityField,
    ydiff: Vec<f64>,
}

impl<'a> HjOperator<'a> {
    fn new(vel: &'a VelocityField) -> Self {
        let grid = *vel.grid();
        HjOperator {
            grid,
            vel,
            ydiff: vec![0.0; grid.nx() * (grid.padded_ny() - 1)],
        }
    }

    fn apply(&mut self, v: &mut [f64], out: &mut [f64]) {
        let g = self.grid;
        fill_ghost_slice(&g, v);
        y_differences_into(&g, v, &mut self.ydiff);
        let (s, nx) = (g.stride(), g.nx());
        let inv_dx = 1.0 / g.dx();
        let (ax, ay) = (self.vel.alpha_x, self.vel.alpha_y);
        let (h1, h2, ydiff) = (self.vel.h1(), self.vel.h2(), &self.ydiff);
        let v: &[f64] = v;

        out.par_chunks_mut(s).enumerate().for_each_init(
            || RowScratch::new(&g),
            |sc, (p, orow)| {
                if p < GHOST || p >= GHOST + g.ny() {
                    orow.fill(0.0);
                    return;
                }
                let base = p * s + GHOST;
                let row = RowInputs {
                    g: &g,
                    j: p - GHOST,
                    v: &v[p * s..(p + 1) * s],
                    inv_dx,
                    ydiff,
                    h1: &h1[base..base + nx],
                    h2: &h2[base..base + nx],
                    ax,
                    ay,
                };
                orow[..GHOST].fill(0.0);
                orow[GHOST + nx..].fill(0.0);
                operator_row(&row, sc, &mut orow[GHOST..GHOST + nx]);
            },
        );
    }
}

/// `L(v)` on the interior (ghost entries of the result are zero).
pub fn spatial_operator(v: &ScalarField, vel: &VelocityField) -> Result<ScalarField> {
    if !v.ghosts_filled() {
        return Err(Error::GhostsNotFilled);
    }
    if v.grid() != vel.grid() {
        return Err(Error::invalid("field and velocity live on different grids"));
    }
    let mut state = v.values().to_vec();
    let mut out = vec![0.0; state.len()];
    HjOperator::new(vel).apply(&mut state, &mut out);
    Ok(ScalarField::from_raw(*v.grid(), out, v.time(), false))
}

/// `cfl / (alpha_x/dx + alpha_y/dy)`, or `t_final` when nothing moves.
pub fn cfl_timestep(vel: &VelocityField, grid: &Grid2D, cfl: f64, t_final: f64) -> f64 {
    let rate = vel.alpha_x / grid.dx() + vel.alpha_y / grid.dy();
    if rate == 0.0 {
        t_final
    } else {
        cfl / rate
    }
}

/// Stage storage for [`tvd_rk4_step`].
pub struct Rk4Buffers {
    l: [Vec<f64>; 4],
}

impl Rk4Buffers {
    pub fn new(len: usize) -> Self {
        Rk4Buffers {
            l: std::array::from_fn(|_| vec![0.0; len]),
        }
    }
}

/// One step of the four-stage scheme
///
/// ```text
/// v1 = v0 + dt/2 L(v0)
/// v2 = v1 + dt/2 (-L(v0) + L(v1))
/// v3 = v2 + dt/2 (-L(v1) + 2 L(v2))
/// v4 = v3 + dt/6 (L(v0) + 2 L(v1) - 4 L(v2) + L(v3))
/// ```
///
/// `op(state, out)` writes `L(state)` into `out`; it may touch `state`
/// (ghost refill).
pub fn tvd_rk4_step(
    v: &mut [f64],
    dt: f64,
    bufs: &mut Rk4Buffers,
    mut op: impl FnMut(&mut [f64], &mut [f64]),
) {
    let [l0, l1, l2, l3] = &mut bufs.l;
    let h = 0.5 * dt;
    let s = dt / 6.0;

    op(v, l0);
    v.iter_mut().zip(l0.iter()).for_each(|(x, a)| *x += h * a);
    op(v, l1);
    v.iter_mut()
        .zip(l0.iter().zip(l1.iter()))
        .for_each(|(x, (a, b))| *x += h * (-a + b));
    op(v, l2);
    v.iter_mut()
        .zip(l1.iter().zip(l2.iter()))
        .for_each(|(x, (b, c))| *x += h * (-b + 2.0 * c));
    op(v, l3);
    for (k, x) in v.iter_mut().enumerate() {
        *x += s * (l0[k] + 2.0 * l1[k] - 4.0 * l2[k] + l3[k]);
    }
}

/// Advances the level set by `dt` of pseudo-time; the time tag drops by `dt`.
pub fn rk4_step(v: &ScalarField, vel: &VelocityField, dt: f64) -> Result<ScalarField> {
    if v.grid() != vel.grid() {
        return Err(Error::invalid("field and velocity live on different grids"));
    }
    let g = *v.grid();
    let mut state = v.values().to_vec();
    let mut bufs = Rk4Buffers::new(state.len());
    let mut op = HjOperator::new(vel);
    tvd_rk4_step(&mut state, dt, &mut bufs, |s, o| op.apply(s, o));
    Ok(ScalarField::from_raw(g, state, v.time() - dt, false))
}

/// Marches the level set to each snapshot horizon.
///
/// Each returned field is tagged `t = -tau`. After every step the field is
/// projected onto `v_new <= v_old`: the exact solution never increases in
/// pseudo-time, while Lax-Friedrichs dissipation can lift local minima.
pub fn solve(
    grid: &Grid2D,
    sys: &ReducedSystem,
    init: &ScalarField,
    cfg: &SolveConfig,
) -> Result<Vec<ScalarField>> {
    solve_with_progress(grid, sys, init, cfg, |_, _| {})
}

/// [`solve`] with a callback invoked after each snapshot as `(index, tau)`.
pub fn solve_with_progress(
    grid: &Grid2D,
    sys: &ReducedSystem,
    init: &ScalarField,
    cfg: &SolveConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<Vec<ScalarField>> {
    if init.grid() != grid {
        return Err(Error::invalid("initial field lives on a different grid"));
    }
    let vel = build_velocity(grid, sys)?;
    let dt_max = cfl_timestep(&vel, grid, cfg.cfl(), cfg.t_final());

    let mut state = init.values().to_vec();
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0, time: 0.0 });
    }
    let mut prev = state.clone();
    let mut bufs = Rk4Buffers::new(state.len());
    let mut op = HjOperator::new(&vel);
    let mut snapshots = Vec::with_capacity(cfg.snapshot_times().len());
    let mut tau = 0.0;
    let mut step = 0usize;

    for (k, &target) in cfg.snapshot_times().iter().enumerate() {
        while tau < target {
            let remaining = target - tau;
            let (dt, next) = if remaining <= dt_max * (1.0 + 1e-12) {
                (remaining, target)
            } else {
                (dt_max, tau + dt_max)
            };
            prev.copy_from_slice(&state);
            tvd_rk4_step(&mut state, dt, &mut bufs, |s, o| op.apply(s, o));
            step += 1;
            let mut finite = true;
            for (x, &old) in state.iter_mut().zip(prev.iter()) {
                finite &= x.is_finite();
                *x = x.min(old);
            }
            if !finite {
                return Err(Error::NonFinite { step, time: -next });
            }
            tau = next;
        }
        let mut snap = state.clone();
        fill_ghost_slice(grid, &mut snap);
        snapshots.push(ScalarField::from_raw(*grid, snap, -target, true));
        progress(k, target);
    }
    Ok(snapshots)
}
