use std::collections::HashMap;

use crate::error::{invalid, FppError, Result};
use crate::geometry::{l1, ConvexWindow};
use crate::par;

/// Envelope constants: `a |x - y|_1 <= D(x, y) <= b |x - y|_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub a: f64,
    pub b: f64,
}

impl Bounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && a <= b && b.is_finite()) {
            return invalid(format!("envelope needs 0 <= a <= b < inf, got a={a} b={b}"));
        }
        Ok(Self { a, b })
    }
}

/// Finite point set `origin + spacing * c`, `c` integer.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    coords: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl Grid {
    pub fn from_coords(origin: Vec<f64>, spacing: Vec<f64>, coords: Vec<Vec<i64>>) -> Result<Self> {
        if origin.len() != spacing.len() || spacing.iter().any(|s| !(*s > 0.0)) {
            return invalid("grid spacing must be positive in every direction");
        }
        let mut index = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if c.len() != origin.len() || index.insert(c.clone(), i).is_some() {
                return invalid("grid coordinates must be distinct and of the grid dimension");
            }
        }
        Ok(Self { origin, spacing, coords, index })
    }

    /// Points of the `k`-grid of the window's bounding box that lie in the
    /// window.
    pub fn for_window(window: &ConvexWindow, k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("grid resolution must be positive");
        }
        let (lo, hi) = window.bounding_box();
        let spacing: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / k as f64).collect();
        let d = lo.len();
        let mut coords = Vec::new();
        let mut p = vec![0.0; d];
        crate::util::for_each_index(&vec![0; d], &vec![k as i64; d], |c| {
            for i in 0..d {
                p[i] = lo[i] + c[i] as f64 * spacing[i];
            }
            if window.contains(&p) {
                coords.push(c.to_vec());
            }
        });
        if coords.is_empty() {
            return invalid("window contains no grid point");
        }
        Self::from_coords(lo, spacing, coords)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().fold(0.0, |m, s| m.max(*s))
    }

    pub fn coords(&self, i: usize) -> &[i64] {
        &self.coords[i]
    }

    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords[i].iter().zip(self.origin.iter().zip(&self.spacing)).map(|(c, (o, s))| o + *c as f64 * s).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point equal to `x` (up to rounding).
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let c: Vec<i64> =
            x.iter().zip(self.origin.iter().zip(&self.spacing)).map(|(v, (o, s))| ((v - o) / s).round() as i64).collect();
        let i = self.index_of(&c)?;
        let p = self.point(i);
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (l1(&p, x) <= 1e-9 * scale).then_some(i)
    }

    fn with_frame(&self, origin: Vec<f64>, spacing: Vec<f64>) -> Self {
        Self { origin, spacing, coords: self.coords.clone(), index: self.index.clone() }
    }

    /// Same points, tolerance on the frame.
    pub fn matches(&self, other: &Grid) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        self.coords == other.coords && close(&self.origin, &other.origin) && close(&self.spacing, &other.spacing)
    }
}

/// Outcome of the metric audit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub tolerance: f64,
    pub diagonal: f64,
    pub asymmetry: f64,
    pub triangle_excess: f64,
    pub triangles_checked: usize,
    pub lower_envelope_deficit: f64,
    pub upper_envelope_excess: f64,
}

impl MetricReport {
    pub fn is_clean(&self) -> bool {
        let t = self.tolerance;
        self.diagonal <= t
            && self.asymmetry <= t
            && self.triangle_excess <= t
            && self.lower_envelope_deficit <= t
            && self.upper_envelope_excess <= t
    }
}

/// Triangle checks are exhaustive up to this many points, sampled beyond.
const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 160;
const SAMPLED_TRIANGLES: usize = 400_000;

/// Metric on the points of a [`Grid`] inside a convex window, stored as a
/// dense symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMetric {
    window: ConvexWindow,
    grid: Grid,
    values: Vec<f64>,
    bounds: Bounds,
}

impl GridMetric {
    /// Build and, in debug builds, audit the result (panicking on a
    /// violation, which signals a bug in the producer).
    pub fn assemble(window: ConvexWindow, grid: Grid, values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let m = Self::from_values_unchecked(window, grid, values, bounds)?;
        #[cfg(debug_assertions)]
        {
            let report = m.validate();
            assert!(report.is_clean(), "metric audit failed: {report:?}");
        }
        Ok(m)
    }

    /// Build without auditing; shape is still checked.
    pub fn from_values_unchecked(window: ConvexWindow, grid: Grid, values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * n {
            return invalid(format!("expected {} matrix entries, got {}", n * n, values.len()));
        }
        if window.dim() != grid.dim() {
            return invalid("window and grid dimensions differ");
        }
        Ok(Self { window, grid, values, bounds })
    }

    /// `D(x, y) = g(x - y)` on the `k`-grid.
    pub fn from_norm(window: &ConvexWindow, k: usize, g: impl Fn(&[f64]) -> f64 + Sync, bounds: Bounds) -> Result<Self> {
        let grid = Grid::for_window(window, k)?;
        let pts = grid.points();
        let n = pts.len();
        let rows = par::map_indexed(n, |i| {
            (0..n).map(|j| g(&pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect::<Vec<_>>())).collect::<Vec<f64>>()
        });
        Self::assemble(window.clone(), grid, rows.concat(), bounds)
    }

    pub fn window(&self) -> &ConvexWindow {
        &self.window
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Bound on the error of [`GridMetric::eval`] against the metric it
    /// samples: `b d h` with `h` the largest grid spacing.
    pub fn interpolation_bound(&self) -> f64 {
        self.bounds.b * self.grid.dim() as f64 * self.grid.max_spacing()
    }

    /// Tolerance used by the audit.
    pub fn tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.bounds.b * self.window.diameter_l1())
    }

    pub fn validate(&self) -> MetricReport {
        let n = self.len();
        let pts = self.grid.points();
        let Bounds { a, b } = self.bounds;
        let mut r = MetricReport { tolerance: self.tolerance(), ..Default::default() };
        for i in 0..n {
            r.diagonal = r.diagonal.max(self.get(i, i).abs());
            for j in 0..n {
                let v = self.get(i, j);
                if v.is_nan() {
                    r.asymmetry = f64::INFINITY;
                }
                r.asymmetry = r.asymmetry.max((v - self.get(j, i)).abs());
                let dist = l1(&pts[i], &pts[j]);
                r.lower_envelope_deficit = r.lower_envelope_deficit.max(a * dist - v);
                r.upper_envelope_excess = r.upper_envelope_excess.max(v - b * dist);
            }
        }
        let excess = |i: usize, j: usize, k: usize| self.get(i, j) - self.get(i, k) - self.get(k, j);
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            let rows = par::map_indexed(n, |i| {
                let mut m = f64::NEG_INFINITY;
                for j in 0..n {
                    for k in 0..n {
                        m = m.max(excess(i, j, k));
                    }
                }
                m
            });
            r.triangle_excess = rows.into_iter().fold(0.0, f64::max);
            r.triangles_checked = n * n * n;
        } else {
            let mut s = 0x5EED_u64;
            let mut next = || {
                s = crate::rng::mix64(s);
                (s % n as u64) as usize
            };
            for _ in 0..SAMPLED_TRIANGLES {
                let (i, j, k) = (next(), next(), next());
                r.triangle_excess = r.triangle_excess.max(excess(i, j, k));
            }
            r.triangles_checked = SAMPLED_TRIANGLES;
        }
        r
    }

    /// Value at arbitrary points of the window: exact on grid points,
    /// through the Lipschitz extension elsewhere.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match (self.grid.locate(x), self.grid.locate(y)) {
            (Some(i), Some(j)) => self.get(i, j),
            _ => self.extend(x, y),
        }
    }

    /// `min( min_{x', y'} b|x - x'| + D(x', y') + b|y - y'|, b|x - y| )`.
    pub fn extend(&self, x: &[f64], y: &[f64]) -> f64 {
        let b = self.bounds.b;
        let n = self.len();
        let direct = b * l1(x, y);
        let pts = self.grid.points();
        let best = match (self.grid.locate(x), self.grid.locate(y)) {
            (Some(i), Some(j)) => self.get(i, j),
            (Some(i), None) => (0..n).map(|j| self.get(i, j) + b * l1(y, &pts[j])).fold(f64::INFINITY, f64::min),
            (None, Some(j)) => (0..n).map(|i| b * l1(x, &pts[i]) + self.get(i, j)).fold(f64::INFINITY, f64::min),
            (None, None) => {
                let dy: Vec<f64> = pts.iter().map(|p| b * l1(y, p)).collect();
                (0..n)
                    .map(|i| {
                        let dx = b * l1(x, &pts[i]);
                        self.row(i).iter().zip(&dy).map(|(v, e)| dx + v + e).fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        };
        best.min(direct)
    }

    /// `max_{x,y} ( min_z max(D(x,z), D(z,y)) - D(x,y)/2 )` over grid points.
    pub fn midpoint_defect(&self) -> f64 {
        let n = self.len();
        let rows = par::map_indexed(n, |i| {
            let mut worst = f64::NEG_INFINITY;
            for j in i..n {
                let m = (0..n).map(|k| self.get(i, k).max(self.get(k, j))).fold(f64::INFINITY, f64::min);
                worst = worst.max(m - 0.5 * self.get(i, j));
            }
            worst
        });
        rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup distance to a metric on the same grid.
    pub fn uniform_distance(&self, other: &GridMetric) -> Result<f64> {
        if !self.grid.matches(&other.grid) {
            return invalid("uniform distance needs metrics on the same grid");
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `D_lambda(lambda x, lambda y) = lambda D(x, y)` on `lambda X`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid("scaling factor must be positive");
        }
        let grid = self.grid.with_frame(
            self.grid.origin.iter().map(|v| v * lambda).collect(),
            self.grid.spacing.iter().map(|v| v * lambda).collect(),
        );
        Ok(Self {
            window: self.window.scale(lambda),
            grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
            bounds: self.bounds,
        })
    }

    /// `D_z(x + z, y + z) = D(x, y)` on `X + z`.
    pub fn translate(&self, z: &[f64]) -> Result<Self> {
        if z.len() != self.grid.dim() {
            return invalid("translation vector has the wrong dimension");
        }
        let grid = self.grid.with_frame(self.grid.origin.iter().zip(z).map(|(a, b)| a + b).collect(), self.grid.spacing.clone());
        Ok(Self { window: self.window.translate(z), grid, values: self.values.clone(), bounds: self.bounds })
    }

    /// Smallest value between grid points of the faces `x_axis = min` and
    /// `x_axis = max` of the grid.
    pub fn face_distance(&self, axis: usize) -> f64 {
        let n = self.len();
        let lo = (0..n).map(|i| self.grid.coords(i)[axis]).min().unwrap_or(0);
        let hi = (0..n).map(|i| self.grid.coords(i)[axis]).max().unwrap_or(0);
        let low: Vec<usize> = (0..n).filter(|&i| self.grid.coords(i)[axis] == lo).collect();
        let high: Vec<usize> = (0..n).filter(|&i| self.grid.coords(i)[axis] == hi).collect();
        low.iter().flat_map(|&i| high.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j)).fold(f64::INFINITY, f64::min)
    }

    /// Grid points `x` with `D(0, x) <= t`; the origin must be a grid point.
    pub fn ball_map(&self, t: f64) -> Result<Vec<Vec<f64>>> {
        let o = self
            .grid
            .locate(&vec![0.0; self.grid.dim()])
            .ok_or_else(|| FppError::InvalidInput("the origin is not a grid point".into()))?;
        let slack = self.tolerance();
        Ok((0..self.len()).filter(|&j| self.get(o, j) <= t + slack).map(|j| self.grid.point(j)).collect())
    }
}
