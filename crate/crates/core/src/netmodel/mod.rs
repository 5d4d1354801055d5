//! Networked load-balancing dynamics.
//!
//! Each node `i` carries a load `l_i` evolving as
//! `dl_i/dt = f(l_i) + sum_j a[j][i] * g(l_j - l_i)`, where `a[j][i]` is the
//! weight of edge `j -> i`. For roughly homogeneous networks the tracked node
//! and the network mean obey the two-dimensional system
//!
//! ```text
//! dl_i/dt    = f(l_i) + w_i * g(lbar - l_i)
//! dlbar/dt   = f(lbar)
//! ```
//!
//! with `w_i` the weighted in-degree. [`ReducedSystem`] is that planar field.

mod poly;
mod stability;

pub use poly::Polynomial;
pub use stability::{
    classify_equilibrium_2d, classify_equilibrium_2d_with_tol, gershgorin_certify,
    linear_jacobian, reduced_equilibria, Certificate, EquilibriumKind, EquilibriumPoint,
    SquareMatrix, EQUILIBRIUM_TOL, HYPERBOLIC_TOL,
};

use crate::error::{Error, Result};

/// Weighted directed graph. `weight(j, i)` is the weight of edge `j -> i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n: usize,
    // row-major: weights[j * n + i] = a[j][i]
    weights: Vec<f64>,
}

impl Topology {
    /// Builds a topology from a flat row-major `n x n` weight matrix.
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("topology needs at least one node"));
        }
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: weights.len(),
            });
        }
        for j in 0..n {
            for i in 0..n {
                let a = weights[j * n + i];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::invalid(format!(
                        "edge weight a[{j}][{i}] = {a} must be finite and nonnegative"
                    )));
                }
                if i == j && a != 0.0 {
                    return Err(Error::invalid(format!("self-loop on node {i}")));
                }
            }
        }
        Ok(Topology { n, weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Topology::new(n, flat)
    }

    /// Zero-based `(from, to, weight)` triples. Repeated edges accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut flat = vec![0.0; n * n];
        for &(from, to, w) in edges {
            if from >= n || to >= n {
                return Err(Error::invalid(format!(
                    "edge {from}->{to} out of range for {n} nodes"
                )));
            }
            flat[from * n + to] += w;
        }
        Topology::new(n, flat)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Topology::new(n, vec![0.0; n * n])
    }

    /// Undirected unit-weight ring lattice: every node linked to its `k`
    /// nearest neighbours (`k/2` per side).
    pub fn ring(n: usize, k: usize) -> Result<Self> {
        if !k.is_multiple_of(2) || k >= n {
            return Err(Error::invalid(format!(
                "ring({n}, {k}) needs an even k smaller than n"
            )));
        }
        let mut edges = Vec::with_capacity(n * k);
        for i in 0..n {
            for s in 1..=k / 2 {
                edges.push((i, (i + s) % n, 1.0));
                edges.push(((i + s) % n, i, 1.0));
            }
        }
        Topology::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut flat = vec![1.0; n * n];
        for i in 0..n {
            flat[i * n + i] = 0.0;
        }
        Topology::new(n, flat)
    }

    /// Node 0 is the hub, linked both ways to every leaf.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).flat_map(|i| [(0, i, 1.0), (i, 0, 1.0)]).collect();
        Topology::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.n + to]
    }

    /// `w[i] = sum_j a[j][i]`.
    pub fn weighted_in_degree(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.weight(j, i)).sum())
            .collect()
    }
}

/// Polynomial self-dynamics `f` and coupling `g`, expanded about zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec {
    f: Polynomial,
    g: Polynomial,
}

impl DynamicsSpec {
    pub fn new(f_coeffs: Vec<f64>, g_coeffs: Vec<f64>) -> Result<Self> {
        if f_coeffs.iter().chain(&g_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::invalid("dynamics coefficients must be finite"));
        }
        let f = Polynomial::new(f_coeffs);
        let g = Polynomial::new(g_coeffs);
        if f.degree() < 1 {
            return Err(Error::invalid("f must have degree at least 1"));
        }
        if g.degree() < 1 {
            return Err(Error::invalid("g must have degree at least 1"));
        }
        if g.coeffs()[0] != 0.0 {
            return Err(Error::invalid("g(0) must be exactly zero"));
        }
        let bound = f.root_bound();
        if f.real_roots_in(-bound, bound)?.is_empty() {
            return Err(Error::invalid("f has no real root"));
        }
        Ok(DynamicsSpec { f, g })
    }

    /// `f(l) = beta (1 - l)`, `g(x) = gamma x`.
    pub fn linear(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid("beta must be positive"));
        }
        if !(gamma > 0.0) {
            return Err(Error::invalid("gamma must be positive"));
        }
        DynamicsSpec::new(vec![beta, -beta], vec![0.0, gamma])
    }

    /// `f(l) = l (1 - l)`, `g(x) = x^2 - 0.1 x`.
    pub fn nonlinear() -> Self {
        DynamicsSpec::new(vec![0.0, 1.0, -1.0], vec![0.0, -0.1, 1.0])
            .expect("preset coefficients are valid")
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn g(&self) -> &Polynomial {
        &self.g
    }
}

/// Right-hand side of the full `n`-node system.
pub fn full_rhs(l: &[f64], top: &Topology, dynamics: &DynamicsSpec) -> Result<Vec<f64>> {
    let mut out = vec![0.0; top.n()];
    full_rhs_into(l, top, dynamics, &mut out)?;
    Ok(out)
}

pub(crate) fn full_rhs_into(
    l: &[f64],
    top: &Topology,
    dynamics: &DynamicsSpec,
    out: &mut [f64],
) -> Result<()> {
    let n = top.n();
    if l.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: l.len(),
        });
    }
    for i in 0..n {
        let li = l[i];
        let coupling: f64 = (0..n)
            .filter(|&j| top.weight(j, i) != 0.0)
            .map(|j| top.weight(j, i) * dynamics.g.eval(l[j] - li))
            .sum();
        out[i] = dynamics.f.eval(li) + coupling;
    }
    Ok(())
}

/// Planar mean-field reduction for a node of weighted in-degree `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    w: f64,
    dynamics: DynamicsSpec,
}

impl ReducedSystem {
    pub fn new(w: f64, dynamics: DynamicsSpec) -> Result<Self> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!(
                "weighted in-degree must be finite and nonnegative, got {w}"
            )));
        }
        Ok(ReducedSystem { w, dynamics })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn dynamics(&self) -> &DynamicsSpec {
        &self.dynamics
    }

    #[inline]
    pub fn rhs(&self, li: f64, lbar: f64) -> (f64, f64) {
        let d = &self.dynamics;
        (d.f.eval(li) + self.w * d.g.eval(lbar - li), d.f.eval(lbar))
    }

    /// Analytic Jacobian `[[d li'/d li, d li'/d lbar], [0, d lbar'/d lbar]]`.
    pub fn jacobian(&self, li: f64, lbar: f64) -> [[f64; 2]; 2] {
        let df = self.dynamics.f.derivative();
        let dg = self.dynamics.g.derivative();
        let gp = dg.eval(lbar - li);
        [
            [df.eval(li) - self.w * gp, self.w * gp],
            [0.0, df.eval(lbar)],
        ]
    }
}

/// Convenience wrapper over [`ReducedSystem::rhs`].
pub fn reduced_rhs(li: f64, lbar: f64, sys: &ReducedSystem) -> (f64, f64) {
    sys.rhs(li, lbar)
}

/// Free-function form of [`Topology::weighted_in_degree`].
pub fn weighted_in_degree(top: &Topology) -> Vec<f64> {
    top.weighted_in_degree()
}
