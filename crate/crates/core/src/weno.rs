//! Fifth-order WENO one-sided first derivatives for Hamilton-Jacobi problems.
//!
//! With divided differences `D_k = (v_{i+k+1} - v_{i+k}) / h`, the
//! left-biased derivative at `i` blends three third-order ENO candidates
//! built from `D_{-3..=1}`:
//!
//! ```text
//! v0 =  D_{-3}/3 - 7 D_{-2}/6 + 11 D_{-1}/6
//! v1 = -D_{-2}/6 + 5 D_{-1}/6 +    D_0/3
//! v2 =  D_{-1}/3 + 5 D_0/6    -    D_1/6
//! ```
//!
//! using nonlinear weights `w_s = alpha_s / sum(alpha)`,
//! `alpha_s = d_s / (eps + beta_s)^2`, `d = (0.1, 0.6, 0.3)`. The
//! right-biased derivative is the same blend applied to the mirrored
//! differences `D_2, D_1, D_0, D_{-1}, D_{-2}`.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField, GHOST, MIN_POINTS};

pub const WENO_EPS: f64 = 1e-6;
pub const OPTIMAL_WEIGHTS: [f64; 3] = [0.1, 0.6, 0.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// The three ENO candidates for differences `d = [D_{-3}, .., D_1]`.
#[inline(always)]
pub fn eno3_candidates(d: [f64; 5]) -> [f64; 3] {
    let [a, b, c, e, f] = d;
    const SIXTH: f64 = 1.0 / 6.0;
    [
        (2.0 * a - 7.0 * b + 11.0 * c) * SIXTH,
        (-b + 5.0 * c + 2.0 * e) * SIXTH,
        (2.0 * c + 5.0 * e - f) * SIXTH,
    ]
}

#[inline(always)]
pub fn smoothness_indicators(d: [f64; 5]) -> [f64; 3] {
    let [a, b, c, e, f] = d;
    let sq = |x: f64| x * x;
    [
        13.0 / 12.0 * sq(a - 2.0 * b + c) + 0.25 * sq(a - 4.0 * b + 3.0 * c),
        13.0 / 12.0 * sq(b - 2.0 * c + e) + 0.25 * sq(b - e),
        13.0 / 12.0 * sq(c - 2.0 * e + f) + 0.25 * sq(3.0 * c - 4.0 * e + f),
    ]
}

#[inline(always)]
pub fn weno5_weights(d: [f64; 5]) -> [f64; 3] {
    let beta = smoothness_indicators(d);
    let s0 = (WENO_EPS + beta[0]) * (WENO_EPS + beta[0]);
    let s1 = (WENO_EPS + beta[1]) * (WENO_EPS + beta[1]);
    let s2 = (WENO_EPS + beta[2]) * (WENO_EPS + beta[2]);
    // d_k / s_k normalised, multiplied through by s0 s1 s2
    let a0 = OPTIMAL_WEIGHTS[0] * (s1 * s2);
    let a1 = OPTIMAL_WEIGHTS[1] * (s0 * s2);
    let a2 = OPTIMAL_WEIGHTS[2] * (s0 * s1);
    let inv = 1.0 / (a0 + a1 + a2);
    [a0 * inv, a1 * inv, a2 * inv]
}

/// Left-biased WENO5 derivative from `d = [D_{-3}, .., D_1]`.
#[inline(always)]
pub fn weno5(d: [f64; 5]) -> f64 {
    let v = eno3_candidates(d);
    let w = weno5_weights(d);
    w[0] * v[0] + w[1] * v[1] + w[2] * v[2]
}

/// One-sided derivatives on the interior, row-major (`y` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePair {
    pub axis: Axis,
    grid: Grid2D,
    dminus: Vec<f64>,
    dplus: Vec<f64>,
}

impl DerivativePair {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn dminus(&self) -> &[f64] {
        &self.dminus
    }

    pub fn dplus(&self) -> &[f64] {
        &self.dplus
    }

    #[inline]
    pub fn minus(&self, i: usize, j: usize) -> f64 {
        self.dminus[j * self.grid.nx() + i]
    }

    #[inline]
    pub fn plus(&self, i: usize, j: usize) -> f64 {
        self.dplus[j * self.grid.nx() + i]
    }
}

/// WENO5 left- and right-biased derivatives along `axis`.
pub fn upwind_derivatives(field: &ScalarField, axis: Axis) -> Result<DerivativePair> {
    if !field.ghosts_filled() {
        return Err(Error::GhostsNotFilled);
    }
    let g = *field.grid();
    if g.nx() < MIN_POINTS || g.ny() < MIN_POINTS {
        return Err(Error::invalid("WENO stencil needs at least 7 points per axis"));
    }
    let nx = g.nx();
    let mut dminus = vec![0.0; g.interior_len()];
    let mut dplus = vec![0.0; g.interior_len()];
    match axis {
        Axis::X => {
            let mut diff = vec![0.0; g.stride() - 1];
            for j in 0..g.ny() {
                let row = g.idx(0, j + GHOST);
                differences(&field.values()[row..row + g.stride()], 1.0 / g.dx(), &mut diff);
                let out = j * nx..(j + 1) * nx;
                weno_x_row(&diff, &mut dminus[out.clone()], &mut dplus[out]);
            }
        }
        Axis::Y => {
            let ydiff = y_differences(&g, field.values());
            for j in 0..g.ny() {
                let out = j * nx..(j + 1) * nx;
                weno_y_row(&g, &ydiff, j, &mut dminus[out.clone()], &mut dplus[out]);
            }
        }
    }
    Ok(DerivativePair {
        axis,
        grid: g,
        dminus,
        dplus,
    })
}

/// `out[k] = (v[k+1] - v[k]) * inv_h`.
#[inline(always)]
pub(crate) fn differences(v: &[f64], inv_h: f64, out: &mut [f64]) {
    let n = v.len() - 1;
    let (lo, hi, out) = (&v[..n], &v[1..=n], &mut out[..n]);
    for k in 0..n {
        out[k] = (hi[k] - lo[k]) * inv_h;
    }
}

/// Forward differences between consecutive padded rows; row `r` holds
/// `(v[r+1] - v[r]) / dy` restricted to interior columns.
pub(crate) fn y_differences(g: &Grid2D, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.nx() * (g.padded_ny() - 1)];
    y_differences_into(g, v, &mut out);
    out
}

pub(crate) fn y_differences_into(g: &Grid2D, v: &[f64], out: &mut [f64]) {
    let (s, nx) = (g.stride(), g.nx());
    let inv = 1.0 / g.dy();
    for r in 0..g.padded_ny() - 1 {
        let lo = &v[r * s + GHOST..r * s + GHOST + nx];
        let hi = &v[(r + 1) * s + GHOST..(r + 1) * s + GHOST + nx];
        let o = &mut out[r * nx..(r + 1) * nx];
        for k in 0..nx {
            o[k] = (hi[k] - lo[k]) * inv;
        }
    }
}

/// One padded row of x differences (length `nx + 5`) to interior derivatives.
#[inline(always)]
pub(crate) fn weno_x_row(diff: &[f64], dminus: &mut [f64], dplus: &mut [f64]) {
    let n = dminus.len();
    let d0 = &diff[0..n];
    let d1 = &diff[1..n + 1];
    let d2 = &diff[2..n + 2];
    let d3 = &diff[3..n + 3];
    let d4 = &diff[4..n + 4];
    let d5 = &diff[5..n + 5];
    let dp = &mut dplus[..n];
    for k in 0..n {
        dminus[k] = weno5([d0[k], d1[k], d2[k], d3[k], d4[k]]);
        dp[k] = weno5([d5[k], d4[k], d3[k], d2[k], d1[k]]);
    }
}

/// Interior row `j` of y derivatives from precomputed row differences.
#[inline(always)]
pub(crate) fn weno_y_row(g: &Grid2D, ydiff: &[f64], j: usize, dminus: &mut [f64], dplus: &mut [f64]) {
    let nx = g.nx();
    // padded row p = j + GHOST; D_k lives in difference row p + k
    let row = |k: usize| &ydiff[(j + k) * nx..(j + k + 1) * nx];
    let (r0, r1, r2, r3, r4, r5) = (row(0), row(1), row(2), row(3), row(4), row(5));
    let (dm, dp) = (&mut dminus[..nx], &mut dplus[..nx]);
    for k in 0..nx {
        dm[k] = weno5([r0[k], r1[k], r2[k], r3[k], r4[k]]);
        dp[k] = weno5([r5[k], r4[k], r3[k], r2[k], r1[k]]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(g: Grid2D, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField::from_fn(g, f)
    }

    #[test]
    fn candidates_exact_on_quadratics() {
        // v = x^2 at unit spacing around x_i = 0: D_k = 2k + 1 ... exact derivative 0
        let d = [-5.0, -3.0, -1.0, 1.0, 3.0];
        for c in eno3_candidates(d) {
            assert!(c.abs() < 1e-14);
        }
        assert!(weno5(d).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        let samples = [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, -2.0, 3.0, 100.0, -7.0],
            [1e-3, 2e-3, 1e3, 0.5, 0.25],
        ];
        for d in samples {
            let w = weno5_weights(d);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
        let w = weno5_weights([1.0; 5]);
        for (a, b) in w.iter().zip(OPTIMAL_WEIGHTS) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_field_exact() {
        let g = Grid2D::new(-1.0, 1.0, 0.0, 2.0, 21, 17).unwrap();
        let f = field(g, |x, y| 3.0 * x + 2.0 * y);
        let dx = upwind_derivatives(&f, Axis::X).unwrap();
        let dy = upwind_derivatives(&f, Axis::Y).unwrap();
        for k in 0..g.interior_len() {
            assert!((dx.dminus()[k] - 3.0).abs() < 1e-12);
            assert!((dx.dplus()[k] - 3.0).abs() < 1e-12);
            assert!((dy.dminus()[k] - 2.0).abs() < 1e-12);
            assert!((dy.dplus()[k] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_field_exact() {
        let g = Grid2D::new(-1.0, 1.0, -0.5, 0.5, 21, 11).unwrap();
        let f = field(g, |x, y| x * x - 0.5 * y * y + x * y);
        let px = upwind_derivatives(&f, Axis::X).unwrap();
        let py = upwind_derivatives(&f, Axis::Y).unwrap();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let (x, y) = g.point(i, j);
                let (ex, ey) = (2.0 * x + y, -y + x);
                let tol = 1e-12 * ex.abs().max(1.0);
                assert!((px.minus(i, j) - ex).abs() < tol);
                assert!((px.plus(i, j) - ex).abs() < tol);
                let tol = 1e-12 * ey.abs().max(1.0);
                assert!((py.minus(i, j) - ey).abs() < tol);
                assert!((py.plus(i, j) - ey).abs() < tol);
            }
        }
    }

    #[test]
    fn mirror_antisymmetry() {
        let g = Grid2D::new(-1.0, 1.0, -1.0, 1.0, 31, 9).unwrap();
        let h = |x: f64| (2.0 * x).sin() + 0.3 * x * x * x + (x - 0.2).abs();
        let a = field(g, |x, _| h(x));
        let b = field(g, |x, _| h(-x));
        let pa = upwind_derivatives(&a, Axis::X).unwrap();
        let pb = upwind_derivatives(&b, Axis::X).unwrap();
        let n = g.nx();
        for j in 0..g.ny() {
            for i in 0..n {
                let r = n - 1 - i;
                assert!((pa.minus(i, j) + pb.plus(r, j)).abs() < 1e-12);
                assert!((pa.plus(i, j) + pb.minus(r, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unfilled_ghosts() {
        let g = Grid2D::new(0.0, 1.0, 0.0, 1.0, 9, 9).unwrap();
        let mut f = ScalarField::zeros(g);
        assert!(matches!(upwind_derivatives(&f, Axis::X), Err(Error::GhostsNotFilled)));
        f.fill_ghost();
        assert!(upwind_derivatives(&f, Axis::Y).is_ok());
    }

    #[test]
    fn sine_refinement_at_least_third_order() {
        let err = |n: usize| {
            let g = Grid2D::new(0.0, 3.0, 0.0, 1.0, n, 7).unwrap();
            let f = field(g, |x, _| x.sin());
            let p = upwind_derivatives(&f, Axis::X).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..n {
                let (x, _) = g.point(i, 3);
                e = e.max((p.minus(i, 3) - x.cos()).abs()).max((p.plus(i, 3) - x.cos()).abs());
            }
            e
        };
        let (e1, e2) = (err(61), err(121));
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }
}
