//! Commands behind the `roa` binary.
//!
//! Artifacts are laid out as `<out>/<experiment>/w<w>/` with one
//! `field_T<T>.csv`, `mask_T<T>.csv` and `contour_T<T>.csv` per snapshot and
//! a `basin_mask.csv` from the oracle. Each command also writes
//! `summary.json` and a plain-text `summary.txt` at the root.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{DynamicsSection, Experiment, GridSection, OracleSection, RunConfig, SolverSection};
use crate::error::{Error, Result};
use crate::grid::{fmt17, signed_distance_circle, write_text, ScalarField};
use crate::hjsolver::solve_with_progress;
use crate::netmodel::{gershgorin_certify, linear_jacobian, ReducedSystem};
use crate::oracle::{classify_basin, compare, consensus_target, convergence_time, BasinMask, ConvergenceTime};
use crate::roa::RoaEstimate;

/// Tolerance on `v` when checking that sublevel sets only grow.
pub const NESTING_TOL: f64 = 1e-9;
pub const CONSERVATIVE_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Oracle,
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub conservative_fraction: f64,
    pub jaccard: f64,
    pub violations: usize,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotSummary {
    pub horizon: f64,
    pub inside_points: usize,
    pub area: f64,
    pub contours: usize,
    pub comparison: Option<ComparisonSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub target: [f64; 2],
    pub basin_points: usize,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub w: f64,
    pub status: String,
    pub error: Option<String>,
    pub snapshots: Vec<SnapshotSummary>,
    /// Points inside an earlier snapshot whose value later exceeds the
    /// nesting tolerance.
    pub nesting_violations: Option<usize>,
    pub oracle: Option<OracleSummary>,
}

impl RunSummary {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn final_area(&self) -> Option<f64> {
        self.snapshots.last().map(|s| s.area)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub dynamics: String,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub schema: String,
    pub command: String,
    pub grid: GridSection,
    pub init_center: [f64; 2],
    pub init_radius: f64,
    pub solver: SolverSection,
    pub oracle: OracleSection,
    pub experiments: Vec<ExperimentSummary>,
    pub failures: usize,
}

fn member_dir(out: &Path, exp: &Experiment, w: f64) -> PathBuf {
    out.join(&exp.name).join(format!("w{w}"))
}

fn horizon_tag(t: f64) -> String {
    format!("T{t}")
}

fn log(msg: impl AsRef<str>) {
    eprintln!("[roa] {}", msg.as_ref());
}

fn nesting_violations(snaps: &[ScalarField]) -> usize {
    snaps
        .windows(2)
        .map(|p| {
            p[0].interior()
                .zip(p[1].interior())
                .filter(|&(a, b)| a <= 0.0 && b > NESTING_TOL)
                .count()
        })
        .sum()
}

fn run_member(cfg: &RunConfig, exp: &Experiment, w: f64, cmd: Command, out: &Path) -> Result<RunSummary> {
    let grid = cfg.grid()?;
    let sys = ReducedSystem::new(w, exp.dynamics.build()?)?;
    let dir = member_dir(out, exp, w);
    let tag = format!("{}/w{w}", exp.name);

    let basin: Option<BasinMask> = if cmd != Command::Solve {
        let [cx, cy] = cfg.init.center;
        let target = consensus_target(&sys, (cx, cy))?;
        log(format!("{tag}: oracle toward ({}, {})", target.li, target.lbar));
        let basin = classify_basin(&grid, &sys, &target, &cfg.oracle_params())?;
        basin.mask.write_csv(&dir.join("basin_mask.csv"))?;
        Some(basin)
    } else {
        None
    };
    let oracle = basin.as_ref().map(|b| OracleSummary {
        target: {
            let t = consensus_target(&sys, (cfg.init.center[0], cfg.init.center[1])).expect("found above");
            [t.li, t.lbar]
        },
        basin_points: b.mask.count(),
        area: b.mask.area(),
    });

    let mut snapshots = Vec::new();
    let mut nesting = None;
    if cmd != Command::Oracle {
        let [cx, cy] = cfg.init.center;
        let init = signed_distance_circle(&grid, cx, cy, cfg.init.radius)?;
        let solve_cfg = cfg.solve_config()?;
        let fields = solve_with_progress(&grid, &sys, &init, &solve_cfg, |_, tau| {
            log(format!("{tag}: reached T = {tau}"));
        })?;
        nesting = Some(nesting_violations(&fields));
        for field in &fields {
            let est = RoaEstimate::from_field(field)?;
            let h = horizon_tag(est.horizon);
            field.write_csv(&dir.join(format!("field_{h}.csv")))?;
            est.write_mask_csv(&dir.join(format!("mask_{h}.csv")))?;
            est.write_contour_csv(&dir.join(format!("contour_{h}.csv")))?;
            let comparison = match &basin {
                Some(b) => {
                    let r = compare(&est, b, cfg.oracle.boundary_dilation)?;
                    Some(ComparisonSummary {
                        conservative_fraction: r.conservative_fraction,
                        jaccard: r.jaccard,
                        violations: r.violations.len(),
                        checked: r.checked,
                    })
                }
                None => None,
            };
            snapshots.push(SnapshotSummary {
                horizon: est.horizon,
                inside_points: est.mask.count(),
                area: est.area,
                contours: est.contours.len(),
                comparison,
            });
        }
    }
    Ok(RunSummary {
        w,
        status: "ok".into(),
        error: None,
        snapshots,
        nesting_violations: nesting,
        oracle,
    })
}

/// Runs solve, oracle or the full sweep over every experiment.
///
/// A failing member is recorded and the remaining members still run.
pub fn run_pack(cfg: &RunConfig, cmd: Command, out: &Path) -> Result<SweepSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut experiments = Vec::new();
    let mut failures = 0;
    for exp in &cfg.experiments {
        let mut runs = Vec::new();
        for &w in &exp.w_values {
            let run = run_member(cfg, exp, w, cmd, out).unwrap_or_else(|e| {
                failures += 1;
                log(format!("{}/w{w}: failed: {e}", exp.name));
                RunSummary {
                    w,
                    status: "error".into(),
                    error: Some(e.to_string()),
                    snapshots: Vec::new(),
                    nesting_violations: None,
                    oracle: None,
                }
            });
            runs.push(run);
        }
        experiments.push(ExperimentSummary {
            name: exp.name.clone(),
            dynamics: exp.dynamics.label(),
            runs,
        });
    }
    let summary = SweepSummary {
        schema: cfg.schema.clone(),
        command: cmd.name().into(),
        grid: cfg.grid.clone(),
        init_center: cfg.init.center,
        init_radius: cfg.init.radius,
        solver: cfg.solver.clone(),
        oracle: cfg.oracle.clone(),
        experiments,
        failures,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_text(&out.join("summary.json"), &json)?;
    write_text(&out.join("summary.txt"), &summary_table(&summary))?;
    Ok(summary)
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepSummary> {
    run_pack(cfg, Command::Sweep, out)
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<SweepSummary> {
    run_pack(cfg, Command::Solve, out)
}

pub fn cmd_oracle(cfg: &RunConfig, out: &Path) -> Result<SweepSummary> {
    run_pack(cfg, Command::Oracle, out)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

pub fn summary_table(s: &SweepSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<12} {:>6} {:>6} {:>10} {:>10} {:>12} {:>10} {:>10}",
        "experiment", "w", "T", "area", "oracle", "conservative", "jaccard", "status"
    );
    for e in &s.experiments {
        for r in &e.runs {
            let oracle = r.oracle.as_ref().map(|o| o.area);
            if r.snapshots.is_empty() {
                let _ = writeln!(
                    t,
                    "{:<12} {:>6} {:>6} {:>10} {:>10} {:>12} {:>10} {:>10}",
                    e.name, r.w, "-", "-", opt(oracle), "-", "-", r.status
                );
            }
            for snap in &r.snapshots {
                let c = snap.comparison.as_ref();
                let _ = writeln!(
                    t,
                    "{:<12} {:>6} {:>6} {:>10.6} {:>10} {:>12} {:>10} {:>10}",
                    e.name,
                    r.w,
                    snap.horizon,
                    snap.area,
                    opt(oracle),
                    opt(c.map(|c| c.conservative_fraction)),
                    opt(c.map(|c| c.jaccard)),
                    r.status
                );
            }
        }
    }
    t
}

/// Property violations of a sweep: failed members, shrinking sublevel sets,
/// and conservativeness below the threshold.
pub fn check_sweep(s: &SweepSummary) -> Vec<String> {
    let mut v = Vec::new();
    for e in &s.experiments {
        for r in &e.runs {
            let id = format!("{}/w{}", e.name, r.w);
            if let Some(err) = &r.error {
                v.push(format!("{id}: {err}"));
            }
            if let Some(n) = r.nesting_violations.filter(|&n| n > 0) {
                v.push(format!("{id}: {n} nesting violations"));
            }
            for snap in &r.snapshots {
                if let Some(c) = snap.comparison.as_ref().filter(|c| c.conservative_fraction < CONSERVATIVE_THRESHOLD) {
                    v.push(format!(
                        "{id} T={}: conservative fraction {} below {CONSERVATIVE_THRESHOLD}",
                        snap.horizon, c.conservative_fraction
                    ));
                }
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub experiment: String,
    pub rows: Vec<(f64, ConvergenceTime)>,
}

impl ConvergenceTable {
    /// CSV with header `w,time`; unreached rows carry `timeout` or `diverged`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("w,time\n");
        for &(w, t) in &self.rows {
            let time = match t {
                ConvergenceTime::Reached(t) => fmt17(t),
                ConvergenceTime::Timeout => "timeout".into(),
                ConvergenceTime::Diverged => "diverged".into(),
            };
            let _ = writeln!(s, "{},{time}", fmt17(w));
        }
        s
    }

    /// Whether every row converged and times strictly decrease in row order.
    pub fn strictly_decreasing(&self) -> bool {
        let times: Option<Vec<f64>> = self.rows.iter().map(|(_, t)| t.time()).collect();
        times.is_some_and(|t| t.windows(2).all(|p| p[1] < p[0]))
    }
}

/// Convergence time of the tracked node for each `w`; one
/// `convergence_<experiment>.csv` per experiment.
pub fn cmd_convergence(cfg: &RunConfig, out: &Path) -> Result<Vec<ConvergenceTable>> {
    cfg.validate()?;
    let [a, b] = cfg.convergence.ic;
    let mut tables = Vec::new();
    for exp in &cfg.experiments {
        let dynamics = exp.dynamics.build()?;
        let mut rows = Vec::new();
        for &w in &exp.w_values {
            let sys = ReducedSystem::new(w, dynamics.clone())?;
            rows.push((w, convergence_time((a, b), &sys, cfg.convergence.eps)?));
        }
        let table = ConvergenceTable { experiment: exp.name.clone(), rows };
        write_text(&out.join(format!("convergence_{}.csv", exp.name)), &table.to_csv())?;
        tables.push(table);
    }
    Ok(tables)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub certified: bool,
    pub margin: f64,
}

/// Gershgorin certificate for the linear Jacobian of the configured topology,
/// using the first linear experiment for `beta` and `gamma`.
pub fn cmd_certify(cfg: &RunConfig, out: &Path) -> Result<CertifyReport> {
    cfg.validate()?;
    let top = cfg
        .topology
        .as_ref()
        .ok_or_else(|| Error::Config("certify needs a [topology] section".into()))?
        .build()?;
    let (beta, gamma) = cfg
        .experiments
        .iter()
        .find_map(|e| match e.dynamics {
            DynamicsSection::Linear { beta, gamma } => Some((beta, gamma)),
            _ => None,
        })
        .ok_or_else(|| Error::Config("certify needs an experiment with linear dynamics".into()))?;
    let cert = gershgorin_certify(&linear_jacobian(&top, beta, gamma)?);
    let report = CertifyReport { n: top.n(), beta, gamma, certified: cert.certified, margin: cert.margin };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_text(&out.join("certificate.json"), &json)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TopologySection;

    fn small() -> RunConfig {
        let doc = r#"
schema = "roa/1"
[[experiment]]
name = "lin"
dynamics = { preset = "linear" }
w_values = [2.0]
[grid]
nx = 31
ny = 31
[init]
radius = 0.3
[solver]
t_final = 0.5
snapshots = [0.25, 0.5]
[oracle]
t_max = 15.0
"#;
        RunConfig::from_toml_str(doc).unwrap()
    }

    #[test]
    fn sweep_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let s = cmd_sweep(&small(), dir.path()).unwrap();
        assert_eq!(s.failures, 0);
        let run = &s.experiments[0].runs[0];
        assert_eq!(run.nesting_violations, Some(0));
        assert_eq!(run.oracle.as_ref().unwrap().basin_points, 31 * 31);
        let c = run.snapshots[1].comparison.as_ref().unwrap();
        assert_eq!(c.conservative_fraction, 1.0);
        assert!(check_sweep(&s).is_empty());
        let m = dir.path().join("lin/w2");
        for f in ["field_T0.5.csv", "mask_T0.25.csv", "contour_T0.5.csv", "basin_mask.csv"] {
            assert!(m.join(f).exists(), "{f}");
        }
        assert!(dir.path().join("summary.json").exists());
        let txt = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(txt.starts_with("experiment"));
    }

    #[test]
    fn certify_examples() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small();
        assert!(matches!(cmd_certify(&cfg, dir.path()), Err(Error::Config(_))));
        cfg.topology = Some(TopologySection::Complete { n: 4 });
        let r = cmd_certify(&cfg, dir.path()).unwrap();
        assert!(r.certified && r.margin >= 1.0);
        cfg.experiments[0].dynamics = DynamicsSection::Linear { beta: 0.5, gamma: 2.0 };
        cfg.topology = Some(TopologySection::Ring { n: 6, k: 2 });
        let r = cmd_certify(&cfg, dir.path()).unwrap();
        assert!(r.certified && (r.margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn convergence_at_equilibrium() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small();
        cfg.convergence.ic = [1.0, 1.0];
        cfg.experiments[0].w_values = vec![2.0, 4.0];
        let t = cmd_convergence(&cfg, dir.path()).unwrap();
        assert!(t[0].rows.iter().all(|&(_, c)| c == ConvergenceTime::Reached(0.0)));
        let csv = std::fs::read_to_string(dir.path().join("convergence_lin.csv")).unwrap();
        assert!(csv.starts_with("w,time\n"));
    }
}
