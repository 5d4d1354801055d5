//! Uniform 2D lattice with a three-point ghost margin and scalar fields on it.
//!
//! Storage is row-major with `x` fastest: padded index `(i, j)` lives at
//! `j * stride + i` where `stride = nx + 2 * GHOST`. Interior points occupy
//! `GHOST..GHOST + nx` along each axis.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Ghost margin width; the six-point WENO stencil reaches three cells out.
pub const GHOST: usize = 3;
/// Smallest interior point count per axis.
pub const MIN_POINTS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("grid extents must be finite"));
        }
        if !(xmax > xmin) || !(ymax > ymin) {
            return Err(Error::invalid(format!(
                "grid extents must be increasing: x [{xmin}, {xmax}], y [{ymin}, {ymax}]"
            )));
        }
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_POINTS} points per axis, got {nx}x{ny}"
            )));
        }
        Ok(Grid2D {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
        })
    }

    /// The `[-0.5, 2.5]^2` lattice at 201x201 used by the default experiments.
    pub fn default_experiment() -> Self {
        Grid2D::new(-0.5, 2.5, -0.5, 2.5, 201, 201).expect("static grid is valid")
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }
    pub fn xmax(&self) -> f64 {
        self.xmax
    }
    pub fn ymin(&self) -> f64 {
        self.ymin
    }
    pub fn ymax(&self) -> f64 {
        self.ymax
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    /// Padded row length.
    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    #[inline]
    pub fn padded_ny(&self) -> usize {
        self.ny + 2 * GHOST
    }

    #[inline]
    pub fn padded_len(&self) -> usize {
        self.stride() * self.padded_ny()
    }

    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of padded coordinates.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.stride() + i
    }

    /// Flat index of interior coordinates (`0..nx`, `0..ny`).
    #[inline]
    pub fn interior_idx(&self, i: usize, j: usize) -> usize {
        self.idx(i + GHOST, j + GHOST)
    }

    /// Coordinate of a padded index; ghost indices map outside the domain.
    #[inline]
    pub fn x_at(&self, i: usize) -> f64 {
        self.xmin + (i as f64 - GHOST as f64) * self.dx()
    }

    #[inline]
    pub fn y_at(&self, j: usize) -> f64 {
        self.ymin + (j as f64 - GHOST as f64) * self.dy()
    }

    /// Interior coordinate of interior indices.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.xmin + i as f64 * self.dx(),
            self.ymin + j as f64 * self.dy(),
        )
    }

    /// Nearest interior index to a coordinate, or `None` outside the domain.
    pub fn nearest_interior(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !self.contains(x, y) {
            return None;
        }
        let i = ((x - self.xmin) / self.dx()).round() as usize;
        let j = ((y - self.ymin) / self.dy()).round() as usize;
        Some((i.min(self.nx - 1), j.min(self.ny - 1)))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    pub fn diameter(&self) -> f64 {
        (self.xmax - self.xmin).hypot(self.ymax - self.ymin)
    }
}

/// Values on every padded point of a grid, plus a time tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
    time: f64,
    ghosts_filled: bool,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.padded_len()],
            time: 0.0,
            ghosts_filled: false,
        }
    }

    /// Samples `f` at every padded point, ghosts included.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.padded_len());
        for j in 0..grid.padded_ny() {
            let y = grid.y_at(j);
            for i in 0..grid.stride() {
                values.push(f(grid.x_at(i), y));
            }
        }
        ScalarField {
            grid,
            values,
            time: 0.0,
            ghosts_filled: true,
        }
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>, time: f64, ghosts_filled: bool) -> Self {
        debug_assert_eq!(values.len(), grid.padded_len());
        ScalarField {
            grid,
            values,
            time,
            ghosts_filled,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn ghosts_filled(&self) -> bool {
        self.ghosts_filled
    }

    /// Full padded storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable padded storage. Marks the ghost layers stale.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.ghosts_filled = false;
        &mut self.values
    }

    /// Value at interior indices.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.interior_idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.ghosts_filled = false;
        let k = self.grid.interior_idx(i, j);
        self.values[k] = v;
    }

    /// Interior values in row-major order (`y` outer, `x` inner).
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.grid;
        (0..g.ny()).flat_map(move |j| {
            let start = g.interior_idx(0, j);
            self.values[start..start + g.nx()].iter().copied()
        })
    }

    pub fn max_abs_interior(&self) -> f64 {
        self.interior().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Refills the ghost layers in place.
    pub fn fill_ghost(&mut self) {
        fill_ghost_slice(&self.grid, &mut self.values);
        self.ghosts_filled = true;
    }

    /// Value-returning form of [`ScalarField::fill_ghost`].
    pub fn with_ghosts_filled(mut self) -> Self {
        self.fill_ghost();
        self
    }

    /// CSV with header `x,y,v`, interior points only.
    pub fn to_csv(&self) -> String {
        let g = self.grid;
        let mut s = String::with_capacity(g.interior_len() * 72 + 8);
        s.push_str("x,y,v\n");
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let (x, y) = g.point(i, j);
                let _ = writeln!(s, "{},{},{}", fmt17(x), fmt17(y), fmt17(self.at(i, j)));
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// Linear extrapolation into the ghost margin: x-axis edges on interior rows
/// first, then y-axis edges across every padded column, which also fills the
/// corners.
pub(crate) fn fill_ghost_slice(grid: &Grid2D, v: &mut [f64]) {
    let s = grid.stride();
    let (nx, ny) = (grid.nx(), grid.ny());
    let (lo, hix) = (GHOST, GHOST + nx - 1);
    for j in GHOST..GHOST + ny {
        let row = &mut v[j * s..(j + 1) * s];
        let (a, b) = (row[lo], row[lo + 1]);
        let (c, d) = (row[hix], row[hix - 1]);
        for k in 1..=GHOST {
            let kf = k as f64;
            row[lo - k] = a + kf * (a - b);
            row[hix + k] = c + kf * (c - d);
        }
    }
    let (loy, hiy) = (GHOST, GHOST + ny - 1);
    for k in 1..=GHOST {
        let kf = k as f64;
        for i in 0..s {
            let a = v[loy * s + i];
            let b = v[(loy + 1) * s + i];
            v[(loy - k) * s + i] = a + kf * (a - b);
            let c = v[hiy * s + i];
            let d = v[(hiy - 1) * s + i];
            v[(hiy + k) * s + i] = c + kf * (c - d);
        }
    }
}

/// `sqrt((x - cx)^2 + (y - cy)^2) - c` on every padded point, time tag 0.
pub fn signed_distance_circle(grid: &Grid2D, cx: f64, cy: f64, c: f64) -> Result<ScalarField> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("circle radius must be positive, got {c}")));
    }
    if !grid.contains(cx, cy) {
        return Err(Error::invalid(format!(
            "circle center ({cx}, {cy}) lies outside the domain"
        )));
    }
    Ok(ScalarField::from_fn(*grid, |x, y| (x - cx).hypot(y - cy) - c))
}

/// Seventeen significant digits, scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
