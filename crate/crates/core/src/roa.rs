//! Region-of-attraction estimates from level-set snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{fmt17, write_text, Grid2D, ScalarField};

/// Boolean per interior grid point, row-major with `y` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    grid: Grid2D,
    inside: Vec<bool>,
}

impl Mask {
    pub fn new(grid: Grid2D, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.interior_len() {
            return Err(Error::DimensionMismatch {
                expected: grid.interior_len(),
                got: inside.len(),
            });
        }
        Ok(Mask { grid, inside })
    }

    pub fn filled(grid: Grid2D, value: bool) -> Self {
        Mask {
            inside: vec![value; grid.interior_len()],
            grid,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.grid.nx() + i]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let nx = self.grid.nx();
        self.inside[j * nx + i] = value;
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_full(&self) -> bool {
        self.inside.iter().all(|&b| b)
    }

    /// `count * dx * dy`.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.dx() * self.grid.dy()
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.grid == other.grid && self.inside.iter().zip(&other.inside).all(|(&a, &b)| !a || b)
    }

    /// Inside points with at least one outside 4-neighbour.
    pub fn boundary_points(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if !self.get(i, j) {
                    continue;
                }
                let edge = (i > 0 && !self.get(i - 1, j))
                    || (i + 1 < nx && !self.get(i + 1, j))
                    || (j > 0 && !self.get(i, j - 1))
                    || (j + 1 < ny && !self.get(i, j + 1));
                if edge {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// CSV with header `x,y,inside`.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.inside.len() * 50 + 16);
        s.push_str("x,y,inside\n");
        for j in 0..self.grid.ny() {
            for i in 0..self.grid.nx() {
                let (x, y) = self.grid.point(i, j);
                let _ = writeln!(s, "{},{},{}", fmt17(x), fmt17(y), self.get(i, j) as u8);
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// `v <= level` at every interior point.
pub fn sublevel_mask(field: &ScalarField, level: f64) -> Result<Mask> {
    if !level.is_finite() {
        return Err(Error::invalid(format!("level must be finite, got {level}")));
    }
    let inside = field.interior().map(|v| v <= level).collect();
    Mask::new(*field.grid(), inside)
}

/// Area of a mask on a given grid.
pub fn area(mask: &Mask, grid: &Grid2D) -> Result<f64> {
    if mask.grid() != grid {
        return Err(Error::invalid("mask and grid disagree"));
    }
    Ok(mask.area())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// Closed polylines repeat their first point at the end.
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|p| (p[1].0 - p[0].0).hypot(p[1].1 - p[0].1))
            .sum()
    }

    /// Shoelace area; positive for counter-clockwise closed polylines.
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .points
            .windows(2)
            .map(|p| p[0].0 * p[1].1 - p[1].0 * p[0].1)
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// Between interior points `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between interior points `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

fn crossing(field: &ScalarField, e: Edge, level: f64) -> (f64, f64) {
    let g = field.grid();
    let ((i0, j0), (i1, j1)) = match e {
        Edge::H(i, j) => ((i, j), (i + 1, j)),
        Edge::V(i, j) => ((i, j), (i, j + 1)),
    };
    let (a, b) = (field.at(i0, j0), field.at(i1, j1));
    let t = ((level - a) / (b - a)).clamp(0.0, 1.0);
    let (x0, y0) = g.point(i0, j0);
    let (x1, y1) = g.point(i1, j1);
    (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
}

/// Marching squares on interior cells.
///
/// Each polyline keeps the region `v <= level` on its left, so contours run
/// counter-clockwise around inside regions. Ambiguous cells are resolved by
/// the sign of the cell-centre average.
pub fn extract_contour(field: &ScalarField, level: f64) -> Result<Vec<Polyline>> {
    if !level.is_finite() {
        return Err(Error::invalid(format!("level must be finite, got {level}")));
    }
    let g = field.grid();
    let mut next: BTreeMap<Edge, Edge> = BTreeMap::new();
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            let corners = [
                field.at(i, j),
                field.at(i + 1, j),
                field.at(i + 1, j + 1),
                field.at(i, j + 1),
            ];
            let inside = corners.map(|v| v <= level);
            if inside.iter().all(|&b| b) || inside.iter().all(|&b| !b) {
                continue;
            }
            // edges in counter-clockwise order, each traversed corner k -> k+1
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let mut cross: Vec<(Edge, bool)> = Vec::with_capacity(4);
            for k in 0..4 {
                if inside[k] != inside[(k + 1) % 4] {
                    cross.push((edges[k], inside[k]));
                }
            }
            let centre_inside = corners.iter().sum::<f64>() * 0.25 <= level;
            let m = cross.len();
            for (k, &(edge, leaving)) in cross.iter().enumerate() {
                if !leaving {
                    continue;
                }
                let partner = if centre_inside { (k + 1) % m } else { (k + m - 1) % m };
                next.insert(edge, cross[partner].0);
            }
        }
    }

    let ends: BTreeSet<Edge> = next.values().copied().collect();
    let mut used: BTreeSet<Edge> = BTreeSet::new();
    let mut polylines = Vec::new();
    let walk = |start: Edge, used: &mut BTreeSet<Edge>| {
        let mut pts = vec![crossing(field, start, level)];
        let mut cur = start;
        used.insert(cur);
        let mut closed = false;
        while let Some(&n) = next.get(&cur) {
            pts.push(crossing(field, n, level));
            if n == start {
                closed = true;
                break;
            }
            if !used.insert(n) {
                break;
            }
            cur = n;
        }
        Polyline { points: pts, closed }
    };
    for &start in next.keys() {
        if !ends.contains(&start) && !used.contains(&start) {
            polylines.push(walk(start, &mut used));
        }
    }
    for &start in next.keys() {
        if !used.contains(&start) {
            polylines.push(walk(start, &mut used));
        }
    }
    Ok(polylines)
}

/// CSV with header `polyline_id,x,y`.
pub fn contours_to_csv(contours: &[Polyline]) -> String {
    let mut s = String::from("polyline_id,x,y\n");
    for (id, p) in contours.iter().enumerate() {
        for &(x, y) in &p.points {
            let _ = writeln!(s, "{id},{},{}", fmt17(x), fmt17(y));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoaEstimate {
    pub mask: Mask,
    pub contours: Vec<Polyline>,
    pub area: f64,
    pub horizon: f64,
}

impl RoaEstimate {
    /// Zero-sublevel estimate of a snapshot tagged `t = -T`.
    pub fn from_field(field: &ScalarField) -> Result<Self> {
        if field.interior().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field must be finite"));
        }
        let mask = sublevel_mask(field, 0.0)?;
        let contours = extract_contour(field, 0.0)?;
        Ok(RoaEstimate {
            area: mask.area(),
            mask,
            contours,
            horizon: field.time().abs(),
        })
    }

    pub fn write_mask_csv(&self, path: &Path) -> Result<()> {
        self.mask.write_csv(path)
    }

    pub fn write_contour_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &contours_to_csv(&self.contours))
    }
}
