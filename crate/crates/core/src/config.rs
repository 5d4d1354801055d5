//! Run configuration, read from a TOML document.
//!
//! Every field except `schema` has a default, and unknown keys are rejected.
//! An empty document apart from `schema` describes the default experiment
//! pack: the linear preset over `w = 2, 4, 6, 8` and the nonlinear preset
//! over `w = 1, 3, 5, 7` on `[-0.5, 2.5]^2`.
//!
//! ```toml
//! schema = "roa/1"
//! output_dir = "out"
//!
//! [[experiment]]
//! name = "nonlinear"
//! dynamics = { preset = "nonlinear" }
//! w_values = [1.0, 3.0, 5.0, 7.0]
//!
//! [grid]
//! nx = 201
//! ny = 201
//!
//! [solver]
//! t_final = 6.0
//! snapshots = [1.0, 2.0, 4.0, 6.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::hjsolver::SolveConfig;
use crate::netmodel::{DynamicsSpec, ReducedSystem, Topology};
use crate::oracle::OracleParams;

pub const SCHEMA: &str = "roa/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_experiments", rename = "experiment")]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    #[serde(default)]
    pub topology: Option<TopologySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    pub dynamics: DynamicsSection,
    pub w_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase", deny_unknown_fields)]
pub enum DynamicsSection {
    Linear {
        #[serde(default = "one")]
        beta: f64,
        #[serde(default = "one")]
        gamma: f64,
    },
    Nonlinear,
    Custom {
        f: Vec<f64>,
        g: Vec<f64>,
    },
}

impl DynamicsSection {
    pub fn build(&self) -> Result<DynamicsSpec> {
        match self {
            DynamicsSection::Linear { beta, gamma } => DynamicsSpec::linear(*beta, *gamma),
            DynamicsSection::Nonlinear => Ok(DynamicsSpec::nonlinear()),
            DynamicsSection::Custom { f, g } => DynamicsSpec::new(f.clone(), g.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DynamicsSection::Linear { beta, gamma } => format!("linear(beta={beta}, gamma={gamma})"),
            DynamicsSection::Nonlinear => "nonlinear(f=l(1-l), g=x^2-0.1x)".to_string(),
            DynamicsSection::Custom { f, g } => format!("custom(f={f:?}, g={g:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { xmin: -0.5, xmax: 2.5, ymin: -0.5, ymax: 2.5, nx: 201, ny: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { center: [1.0, 1.0], radius: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub t_final: f64,
    pub cfl: f64,
    pub snapshots: Vec<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { t_final: 6.0, cfl: 0.5, snapshots: vec![1.0, 2.0, 4.0, 6.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub dt: f64,
    pub t_max: f64,
    pub eps: f64,
    pub escape_radius: f64,
    pub boundary_dilation: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        let p = OracleParams::default();
        OracleSection {
            dt: p.dt,
            t_max: p.t_max,
            eps: p.eps,
            escape_radius: p.escape_radius,
            boundary_dilation: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub ic: [f64; 2],
    pub eps: f64,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        ConvergenceSection { ic: [1.8, 1.2], eps: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TopologySection {
    Ring { n: usize, k: usize },
    Complete { n: usize },
    Star { n: usize },
    /// Zero-based `[from, to, weight]` triples.
    Edges { n: usize, edges: Vec<(usize, usize, f64)> },
}

impl TopologySection {
    pub fn build(&self) -> Result<Topology> {
        match self {
            TopologySection::Ring { n, k } => Topology::ring(*n, *k),
            TopologySection::Complete { n } => Topology::complete(*n),
            TopologySection::Star { n } => Topology::star(*n),
            TopologySection::Edges { n, edges } => Topology::from_edges(*n, edges),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_experiments() -> Vec<Experiment> {
    vec![
        Experiment {
            name: "linear".into(),
            dynamics: DynamicsSection::Linear { beta: 1.0, gamma: 1.0 },
            w_values: vec![2.0, 4.0, 6.0, 8.0],
        },
        Experiment {
            name: "nonlinear".into(),
            dynamics: DynamicsSection::Nonlinear,
            w_values: vec![1.0, 3.0, 5.0, 7.0],
        },
    ]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SCHEMA.to_string(),
            output_dir: default_output_dir(),
            experiments: default_experiments(),
            grid: GridSection::default(),
            init: InitSection::default(),
            solver: SolverSection::default(),
            oracle: OracleSection::default(),
            convergence: ConvergenceSection::default(),
            topology: None,
        }
    }
}

impl RunConfig {
    /// Parses and validates a document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every section; all failures surface as config errors.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        };
        if self.schema != SCHEMA {
            return Err(Error::Config(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        if self.experiments.is_empty() {
            return Err(Error::Config("at least one experiment is required".into()));
        }
        for e in &self.experiments {
            if e.name.is_empty() || e.name.contains(['/', '\\']) {
                return Err(Error::Config(format!("invalid experiment name {:?}", e.name)));
            }
            if e.w_values.is_empty() {
                return Err(Error::Config(format!("experiment {:?} has no w_values", e.name)));
            }
            let dynamics = e.dynamics.build().map_err(cfg_err)?;
            for &w in &e.w_values {
                ReducedSystem::new(w, dynamics.clone()).map_err(cfg_err)?;
            }
        }
        let mut names: Vec<&str> = self.experiments.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::Config("experiment names must be unique".into()));
        }
        let grid = self.grid().map_err(cfg_err)?;
        self.solve_config().map_err(cfg_err)?;
        let [cx, cy] = self.init.center;
        if !(self.init.radius > 0.0) || !grid.contains(cx, cy) {
            return Err(Error::Config("init circle must have positive radius and centre inside the grid".into()));
        }
        let p = self.oracle_params();
        p.validate().map_err(cfg_err)?;
        if !(p.escape_radius > grid.diameter()) {
            return Err(Error::Config("oracle.escape_radius must exceed the domain diameter".into()));
        }
        if !(self.convergence.eps > 0.0) || self.convergence.ic.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("convergence needs a finite ic and positive eps".into()));
        }
        if let Some(t) = &self.topology {
            t.build().map_err(cfg_err)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        Grid2D::new(g.xmin, g.xmax, g.ymin, g.ymax, g.nx, g.ny)
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        SolveConfig::new(self.solver.t_final, self.solver.cfl, self.solver.snapshots.clone())
    }

    pub fn oracle_params(&self) -> OracleParams {
        OracleParams {
            dt: self.oracle.dt,
            t_max: self.oracle.t_max,
            eps: self.oracle.eps,
            escape_radius: self.oracle.escape_radius,
        }
    }
}
