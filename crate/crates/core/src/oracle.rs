//! Ground truth by direct integration.
//!
//! Trajectories use fixed-step classical RK4. A run is converged once the
//! state has stayed within `eps` of the target for [`PERSISTENCE`]
//! consecutive samples (the initial sample counts), diverged once its norm
//! exceeds the escape radius or turns non-finite, and timed out otherwise.
//! The entry time of the final streak is interpolated linearly between the
//! last sample outside and the first sample inside the tolerance.
//!
//! The reduced system is integrated in deviations from its target, with `f`
//! re-expanded about the target, so small distances keep full precision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::netmodel::{
    classify_equilibrium_2d, full_rhs, DynamicsSpec, EquilibriumKind, EquilibriumPoint,
    ReducedSystem, Topology,
};
use crate::roa::{Mask, RoaEstimate};

pub const PERSISTENCE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub dt: f64,
    pub t_max: f64,
    pub eps: f64,
    pub escape_radius: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            dt: 1e-3,
            t_max: 50.0,
            eps: 1e-3,
            escape_radius: 100.0,
        }
    }
}

impl OracleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > self.dt) || !self.t_max.is_finite() {
            return Err(Error::invalid("t_max must exceed dt"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::invalid("escape_radius must be positive"));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Timeout,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub verdict: Verdict,
    /// Start of the final in-tolerance streak when converged.
    pub converged_at: Option<f64>,
}

struct Outcome {
    verdict: Verdict,
    converged_at: Option<f64>,
}

/// Shared integration loop over deviations `e` from the target. `abs` maps
/// a deviation back to the state; `dist` measures closeness to the target.
fn run<const N: usize>(
    ic: [f64; N],
    rhs: impl Fn(&[f64; N]) -> [f64; N],
    abs: impl Fn(&[f64; N]) -> [f64; N],
    dist: impl Fn(&[f64; N]) -> f64,
    p: &OracleParams,
    mut record: impl FnMut(f64, &[f64; N]),
) -> Outcome {
    let axpy = |x: &[f64; N], a: f64, k: &[f64; N]| -> [f64; N] {
        std::array::from_fn(|i| x[i] + a * k[i])
    };
    let mut e = ic;
    let mut streak = 0usize;
    let mut streak_start = 0.0;
    let mut prev = f64::INFINITY;
    let h = p.dt;
    for step in 0..=p.steps() {
        let t = step as f64 * h;
        let x = abs(&e);
        record(t, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > p.escape_radius {
            return Outcome { verdict: Verdict::Diverged, converged_at: None };
        }
        let d = dist(&e);
        if d <= p.eps {
            if streak == 0 {
                streak_start = if step == 0 { 0.0 } else { t - h + (prev - p.eps) / (prev - d) * h };
            }
            streak += 1;
            if streak >= PERSISTENCE {
                return Outcome { verdict: Verdict::Converged, converged_at: Some(streak_start) };
            }
        } else {
            streak = 0;
        }
        prev = d;
        if step == p.steps() {
            break;
        }
        let k1 = rhs(&e);
        let k2 = rhs(&axpy(&e, 0.5 * h, &k1));
        let k3 = rhs(&axpy(&e, 0.5 * h, &k2));
        let k4 = rhs(&axpy(&e, h, &k3));
        e = std::array::from_fn(|i| e[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    Outcome { verdict: Verdict::Timeout, converged_at: None }
}

fn run_reduced(
    ic: (f64, f64),
    sys: &ReducedSystem,
    target: (f64, f64),
    node_only: bool,
    p: &OracleParams,
    record: impl FnMut(f64, &[f64; 2]),
) -> Outcome {
    let d = sys.dynamics();
    let (fi, fbar) = (d.f().compose_affine(target.0, 1.0), d.f().compose_affine(target.1, 1.0));
    let shift = d.g().compose_affine(target.1 - target.0, 1.0);
    let w = sys.w();
    run(
        [ic.0 - target.0, ic.1 - target.1],
        |e| [fi.eval(e[0]) + w * shift.eval(e[1] - e[0]), fbar.eval(e[1])],
        |e| [target.0 + e[0], target.1 + e[1]],
        |e| if node_only { e[0].abs() } else { e[0].hypot(e[1]) },
        p,
        record,
    )
}

/// The stable consensus equilibrium `(r, r)`, `f(r) = 0`, closest to `near`.
pub fn consensus_target(sys: &ReducedSystem, near: (f64, f64)) -> Result<EquilibriumPoint> {
    let f = sys.dynamics().f();
    let b = f.root_bound() + 1.0;
    let mut best: Option<(f64, EquilibriumPoint)> = None;
    for r in f.real_roots_in(-b, b)? {
        if classify_equilibrium_2d(r, r, sys)? != EquilibriumKind::StableNode {
            continue;
        }
        let d = (r - near.0).hypot(r - near.1);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, EquilibriumPoint { li: r, lbar: r, kind: EquilibriumKind::StableNode }));
        }
    }
    best.map(|(_, e)| e)
        .ok_or_else(|| Error::invalid("the reduced system has no stable consensus equilibrium"))
}

/// Integrates the reduced system toward its nearest stable consensus state.
pub fn integrate_reduced(ic: (f64, f64), sys: &ReducedSystem, params: &OracleParams) -> Result<Trajectory> {
    params.validate()?;
    let target = consensus_target(sys, ic)?;
    let (mut times, mut states) = (Vec::new(), Vec::new());
    let out = run_reduced(ic, sys, (target.li, target.lbar), false, params, |t, x| {
        times.push(t);
        states.push(x.to_vec());
    });
    Ok(Trajectory { times, states, verdict: out.verdict, converged_at: out.converged_at })
}

/// Integrates the full network toward the all-ones state.
pub fn integrate_full(
    ic: &[f64],
    top: &Topology,
    dynamics: &DynamicsSpec,
    params: &OracleParams,
) -> Result<Trajectory> {
    params.validate()?;
    let n = top.n();
    if ic.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ic.len() });
    }
    full_rhs(ic, top, dynamics)?;
    let h = params.dt;
    let mut x = ic.to_vec();
    let (mut times, mut states) = (Vec::new(), Vec::new());
    let mut streak = 0usize;
    let mut streak_start = 0.0;
    let mut prev = f64::INFINITY;
    let rhs = |s: &[f64]| full_rhs(s, top, dynamics).expect("dimensions checked");
    let axpy = |s: &[f64], a: f64, k: &[f64]| s.iter().zip(k).map(|(s, k)| s + a * k).collect::<Vec<_>>();
    for step in 0..=params.steps() {
        let t = step as f64 * h;
        times.push(t);
        states.push(x.clone());
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > params.escape_radius {
            return Ok(Trajectory { times, states, verdict: Verdict::Diverged, converged_at: None });
        }
        let dist = x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>().sqrt();
        if dist <= params.eps {
            if streak == 0 {
                streak_start = if step == 0 { 0.0 } else { t - h + (prev - params.eps) / (prev - dist) * h };
            }
            streak += 1;
            if streak >= PERSISTENCE {
                return Ok(Trajectory {
                    times,
                    states,
                    verdict: Verdict::Converged,
                    converged_at: Some(streak_start),
                });
            }
        } else {
            streak = 0;
        }
        prev = dist;
        if step == params.steps() {
            break;
        }
        let k1 = rhs(&x);
        let k2 = rhs(&axpy(&x, 0.5 * h, &k1));
        let k3 = rhs(&axpy(&x, 0.5 * h, &k2));
        let k4 = rhs(&axpy(&x, h, &k3));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(Trajectory { times, states, verdict: Verdict::Timeout, converged_at: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinMask {
    pub mask: Mask,
    pub eps: f64,
    pub t_max: f64,
    pub escape_radius: f64,
}

fn check_target(target: &EquilibriumPoint) -> Result<()> {
    if target.kind != EquilibriumKind::StableNode {
        return Err(Error::invalid(format!(
            "basin target ({}, {}) is a {}, not a stable node",
            target.li, target.lbar, target.kind
        )));
    }
    Ok(())
}

/// Whether each point converges to `target`.
pub fn classify_points(
    points: &[(f64, f64)],
    sys: &ReducedSystem,
    target: &EquilibriumPoint,
    params: &OracleParams,
) -> Result<Vec<bool>> {
    check_target(target)?;
    params.validate()?;
    let t = (target.li, target.lbar);
    Ok(points
        .par_iter()
        .map(|&ic| run_reduced(ic, sys, t, false, params, |_, _| {}).verdict == Verdict::Converged)
        .collect())
}

/// Integrates from every interior grid point.
pub fn classify_basin(
    grid: &Grid2D,
    sys: &ReducedSystem,
    target: &EquilibriumPoint,
    params: &OracleParams,
) -> Result<BasinMask> {
    if !(params.escape_radius > grid.diameter()) {
        return Err(Error::invalid("escape_radius must exceed the domain diameter"));
    }
    let points: Vec<(f64, f64)> = (0..grid.ny())
        .flat_map(|j| (0..grid.nx()).map(move |i| (i, j)))
        .map(|(i, j)| grid.point(i, j))
        .collect();
    let inside = classify_points(&points, sys, target, params)?;
    Ok(BasinMask {
        mask: Mask::new(*grid, inside)?,
        eps: params.eps,
        t_max: params.t_max,
        escape_radius: params.escape_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceTime {
    Reached(f64),
    Timeout,
    Diverged,
}

impl ConvergenceTime {
    pub fn time(self) -> Option<f64> {
        match self {
            ConvergenceTime::Reached(t) => Some(t),
            _ => None,
        }
    }
}

/// Time for the tracked node to settle within `eps` of its consensus value.
///
/// Only `|l_i - r|` is measured: this is the load of the node itself.
pub fn convergence_time(ic: (f64, f64), sys: &ReducedSystem, eps: f64) -> Result<ConvergenceTime> {
    convergence_time_with(ic, sys, &OracleParams { eps, ..OracleParams::default() })
}

pub fn convergence_time_with(
    ic: (f64, f64),
    sys: &ReducedSystem,
    params: &OracleParams,
) -> Result<ConvergenceTime> {
    params.validate()?;
    let target = consensus_target(sys, ic)?;
    let out = run_reduced(ic, sys, (target.li, target.lbar), true, params, |_, _| {});
    Ok(match out.verdict {
        Verdict::Converged => ConvergenceTime::Reached(out.converged_at.unwrap_or(0.0)),
        Verdict::Diverged => ConvergenceTime::Diverged,
        Verdict::Timeout => ConvergenceTime::Timeout,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub conservative_fraction: f64,
    pub jaccard: f64,
    /// Level-set inside points away from the contour band that the oracle
    /// does not confirm.
    pub violations: Vec<(usize, usize)>,
    /// Level-set inside points outside the band.
    pub checked: usize,
}

/// Compares a level-set estimate against the oracle basin.
///
/// Points within `boundary_dilation` cells (Chebyshev distance) of the
/// estimate's boundary are excluded from the conservativeness count.
pub fn compare(roa: &RoaEstimate, basin: &BasinMask, boundary_dilation: usize) -> Result<ComparisonReport> {
    let g = *roa.mask.grid();
    if basin.mask.grid() != &g {
        return Err(Error::invalid("estimate and basin live on different grids"));
    }
    let (nx, ny) = (g.nx(), g.ny());
    let mut band = vec![false; nx * ny];
    let r = boundary_dilation;
    for (i, j) in roa.mask.boundary_points() {
        for jj in j.saturating_sub(r)..=(j + r).min(ny - 1) {
            for ii in i.saturating_sub(r)..=(i + r).min(nx - 1) {
                band[jj * nx + ii] = true;
            }
        }
    }
    let (mut checked, mut violations) = (0usize, Vec::new());
    let (mut inter, mut union) = (0usize, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b) = (roa.mask.get(i, j), basin.mask.get(i, j));
            inter += (a && b) as usize;
            union += (a || b) as usize;
            if a && !band[j * nx + i] {
                checked += 1;
                if !b {
                    violations.push((i, j));
                }
            }
        }
    }
    let conservative_fraction = if checked == 0 {
        1.0
    } else {
        (checked - violations.len()) as f64 / checked as f64
    };
    let jaccard = if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    Ok(ComparisonReport { conservative_fraction, jaccard, violations, checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::signed_distance_circle;

    fn nl(w: f64) -> ReducedSystem {
        ReducedSystem::new(w, DynamicsSpec::nonlinear()).unwrap()
    }

    fn lin(w: f64) -> ReducedSystem {
        ReducedSystem::new(w, DynamicsSpec::linear(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn at_equilibrium_converges_immediately() {
        let tr = integrate_reduced((1.0, 1.0), &nl(3.0), &OracleParams::default()).unwrap();
        assert_eq!(tr.verdict, Verdict::Converged);
        assert_eq!(tr.converged_at, Some(0.0));
        assert_eq!(convergence_time((1.0, 1.0), &lin(4.0), 1e-3).unwrap(), ConvergenceTime::Reached(0.0));
    }

    #[test]
    fn logistic_closed_form() {
        let tr = integrate_reduced((0.5, 0.5), &nl(2.0), &OracleParams::default()).unwrap();
        let k = tr.times.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap();
        let exact = 1.0 / (1.0 + (-1.0_f64).exp());
        assert!((tr.states[k][1] - exact).abs() < 1e-10);
    }

    #[test]
    fn nonlinear_escape() {
        let tr = integrate_reduced((1.4, 1.0), &nl(3.0), &OracleParams::default()).unwrap();
        assert_eq!(tr.verdict, Verdict::Diverged);
        let last = tr.states.last().unwrap();
        assert!(last[0] > 1.4);
    }

    #[test]
    fn points_and_targets() {
        let sys = nl(3.0);
        let target = consensus_target(&sys, (1.0, 1.0)).unwrap();
        assert_eq!((target.li, target.lbar), (1.0, 1.0));
        let p = OracleParams::default();
        let v = classify_points(&[(0.5, 0.9), (1.4, 1.0), (1.0, 1.0)], &sys, &target, &p).unwrap();
        assert_eq!(v, vec![true, false, true]);

        let saddle = EquilibriumPoint { li: 1.35, lbar: 1.0, kind: EquilibriumKind::Saddle };
        assert!(classify_points(&[(1.0, 1.0)], &sys, &saddle, &p).is_err());
    }

    #[test]
    fn escape_radius_must_cover_domain() {
        let g = Grid2D::new(0.0, 100.0, 0.0, 100.0, 7, 7).unwrap();
        let sys = lin(2.0);
        let t = consensus_target(&sys, (1.0, 1.0)).unwrap();
        assert!(classify_basin(&g, &sys, &t, &OracleParams::default()).is_err());
    }

    #[test]
    fn linear_degenerate_amplitude() {
        let times: Vec<f64> = [2.0, 4.0, 6.0, 8.0]
            .iter()
            .map(|&w| convergence_time((1.5, 1.5), &lin(w), 1e-3).unwrap().time().unwrap())
            .collect();
        for t in &times {
            assert!((t - times[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn uniform_full_state_matches_scalar() {
        let top = Topology::ring(5, 2).unwrap();
        let dynamics = DynamicsSpec::nonlinear();
        let p = OracleParams { t_max: 2.0, ..OracleParams::default() };
        let full = integrate_full(&[0.4; 5], &top, &dynamics, &p).unwrap();
        let red = integrate_reduced((0.4, 0.4), &nl(2.0), &p).unwrap();
        let k = full.times.len().min(red.times.len());
        for s in 0..k {
            for &v in &full.states[s] {
                assert!((v - red.states[s][1]).abs() < 1e-10);
            }
        }
        let ones = integrate_full(&[1.0; 5], &top, &dynamics, &p).unwrap();
        assert_eq!(ones.converged_at, Some(0.0));
        assert!(integrate_full(&[1.0; 4], &top, &dynamics, &p).is_err());
    }

    #[test]
    fn compare_examples() {
        let g = Grid2D::new(0.0, 2.0, 0.0, 2.0, 41, 41).unwrap();
        let est = RoaEstimate::from_field(&signed_distance_circle(&g, 1.0, 1.0, 0.5).unwrap()).unwrap();
        let same = BasinMask { mask: est.mask.clone(), eps: 1e-3, t_max: 50.0, escape_radius: 100.0 };
        let r = compare(&est, &same, 2).unwrap();
        assert_eq!((r.conservative_fraction, r.jaccard), (1.0, 1.0));
        assert!(r.violations.is_empty());

        let bigger = RoaEstimate::from_field(&signed_distance_circle(&g, 1.0, 1.0, 0.8).unwrap()).unwrap();
        let basin = BasinMask { mask: bigger.mask, ..same.clone() };
        let r = compare(&est, &basin, 2).unwrap();
        assert_eq!(r.conservative_fraction, 1.0);
        assert!(r.jaccard < 1.0);

        let r = compare(&bigger_est(&g), &same, 0).unwrap();
        assert!(r.conservative_fraction < 1.0);
        assert_eq!(r.violations.len(), r.checked - (r.conservative_fraction * r.checked as f64).round() as usize);
    }

    fn bigger_est(g: &Grid2D) -> RoaEstimate {
        RoaEstimate::from_field(&signed_distance_circle(g, 1.0, 1.0, 0.8).unwrap()).unwrap()
    }
}
