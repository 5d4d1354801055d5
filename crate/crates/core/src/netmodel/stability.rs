use crate::error::{Error, Result};

use super::{Polynomial, ReducedSystem, Topology};

/// Real-part magnitude below which an eigenvalue counts as neutral.
pub const HYPERBOLIC_TOL: f64 = 1e-9;
/// Residual bound for accepting a point as an equilibrium before classifying it.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
const MAX_EQUILIBRIUM_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::invalid(format!(
                    "matrix is not square: {n} rows but a row of length {}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// Jacobian at the uniform equilibrium of the linear preset,
/// `J = -beta I + gamma (A^T - D)`.
pub fn linear_jacobian(top: &Topology, beta: f64, gamma: f64) -> Result<SquareMatrix> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta must be positive"));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let n = top.n();
    let w = top.weighted_in_degree();
    let mut j = SquareMatrix::zeros(n);
    for (i, wi) in w.iter().enumerate() {
        for k in 0..n {
            let v = if i == k {
                -beta - gamma * wi
            } else {
                gamma * top.weight(k, i)
            };
            j.set(i, k, v);
        }
    }
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub certified: bool,
    /// `min_i -(J_ii + sum_{j != i} |J_ij|)`; positive iff certified.
    pub margin: f64,
}

/// Row Gershgorin test: certified iff every disc sits in the open left half-plane.
pub fn gershgorin_certify(m: &SquareMatrix) -> Certificate {
    let n = m.n();
    let margin = (0..n)
        .map(|i| {
            let radius: f64 = (0..n).filter(|&k| k != i).map(|k| m.get(i, k).abs()).sum();
            -(m.get(i, i) + radius)
        })
        .fold(f64::INFINITY, f64::min);
    Certificate {
        certified: n > 0 && margin > 0.0,
        margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    StableNode,
    UnstableNode,
    Saddle,
    NonHyperbolic,
}

impl EquilibriumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumKind::StableNode => "stable-node",
            EquilibriumKind::UnstableNode => "unstable-node",
            EquilibriumKind::Saddle => "saddle",
            EquilibriumKind::NonHyperbolic => "non-hyperbolic",
        }
    }
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub li: f64,
    pub lbar: f64,
    pub kind: EquilibriumKind,
}

pub fn classify_equilibrium_2d(li: f64, lbar: f64, sys: &ReducedSystem) -> Result<EquilibriumKind> {
    classify_equilibrium_2d_with_tol(li, lbar, sys, HYPERBOLIC_TOL)
}

/// Classifies from the trace and determinant of the analytic 2x2 Jacobian.
pub fn classify_equilibrium_2d_with_tol(
    li: f64,
    lbar: f64,
    sys: &ReducedSystem,
    hyperbolic_tol: f64,
) -> Result<EquilibriumKind> {
    let (a, b) = sys.rhs(li, lbar);
    let residual = a.hypot(b);
    if !(residual <= EQUILIBRIUM_TOL) {
        return Err(Error::NotEquilibrium { li, lbar, residual });
    }
    let j = sys.jacobian(li, lbar);
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    let (re1, re2) = if disc >= 0.0 {
        let s = disc.sqrt();
        (0.5 * (tr - s), 0.5 * (tr + s))
    } else {
        (0.5 * tr, 0.5 * tr)
    };
    Ok(if re1.abs() < hyperbolic_tol || re2.abs() < hyperbolic_tol {
        EquilibriumKind::NonHyperbolic
    } else if re1 < 0.0 && re2 < 0.0 {
        EquilibriumKind::StableNode
    } else if re1 > 0.0 && re2 > 0.0 {
        EquilibriumKind::UnstableNode
    } else {
        EquilibriumKind::Saddle
    })
}

/// Enumerates equilibria of the reduced system with both coordinates in
/// `[lo, hi]`: the mean coordinate must be a root of `f`, and for each such
/// root the tracked coordinate solves `f(li) + w g(lbar - li) = 0`.
pub fn reduced_equilibria(sys: &ReducedSystem, lo: f64, hi: f64) -> Result<Vec<EquilibriumPoint>> {
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty search interval [{lo}, {hi}]")));
    }
    let f = sys.dynamics().f();
    let g = sys.dynamics().g();
    if f.degree() > MAX_EQUILIBRIUM_DEGREE || g.degree() > MAX_EQUILIBRIUM_DEGREE {
        return Err(Error::invalid(format!(
            "equilibrium search supports polynomial degree <= {MAX_EQUILIBRIUM_DEGREE}"
        )));
    }
    let mut out = Vec::new();
    for lbar in f.real_roots_in(lo, hi)? {
        let p: Polynomial = f.add(&g.compose_affine(lbar, -1.0).scale(sys.w()));
        for li in p.real_roots_in(lo, hi)? {
            let kind = classify_equilibrium_2d(li, lbar, sys)?;
            out.push(EquilibriumPoint { li, lbar, kind });
        }
    }
    Ok(out)
}
