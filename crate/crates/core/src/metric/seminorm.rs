use std::fmt;
use std::str::FromStr;

use super::grid::Bounds;
use crate::error::{invalid, FppError, Result};
use crate::geometry::{l1_norm, ConvexWindow};

/// Seminorm on R^d, the local gradient of a metric.
#[derive(Clone, Debug, PartialEq)]
pub enum Seminorm {
    /// `c |u|_1`.
    ScaledL1(f64),
    /// `max_i zeta_i |u_i|`.
    WeightedLinf(Vec<f64>),
    /// Pointwise maximum.
    Max(Vec<Seminorm>),
    /// Values on l1-unit directions, extended by homogeneity.
    Sampled(SampledSeminorm),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledSeminorm {
    dim: usize,
    directions: Vec<Vec<f64>>,
    values: Vec<f64>,
}

/// Unit l1 directions: 64 evenly spaced along the diamond in 2D, the
/// normalised primitive vectors of sup norm at most 2 in 3D, and of sup norm
/// 1 otherwise.
pub fn l1_sphere_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64).map(|j| diamond_point(j as f64 / 16.0)).collect(),
        _ => {
            let r = if d == 3 { 2 } else { 1 };
            primitive_offsets(d, r)
                .into_iter()
                .map(|o| {
                    let s: i64 = o.iter().map(|v| v.abs()).sum();
                    o.iter().map(|v| *v as f64 / s as f64).collect()
                })
                .collect()
        }
    }
}

/// Point of the 2D l1 unit sphere at perimeter parameter `s` in `[0, 4)`.
fn diamond_point(s: f64) -> Vec<f64> {
    let q = s.floor();
    let f = s - q;
    match q as i64 {
        0 => vec![1.0 - f, f],
        1 => vec![-f, 1.0 - f],
        2 => vec![-(1.0 - f), -f],
        _ => vec![f, -(1.0 - f)],
    }
}

fn diamond_param(u: &[f64]) -> f64 {
    let (x, y) = (u[0], u[1]);
    if x > 0.0 && y >= 0.0 {
        y
    } else if x <= 0.0 && y > 0.0 {
        1.0 - x
    } else if x < 0.0 && y <= 0.0 {
        2.0 - y
    } else {
        3.0 + x
    }
}

/// Integer vectors with sup norm at most `r` whose entries have gcd 1.
pub(crate) fn primitive_offsets(d: usize, r: i64) -> Vec<Vec<i64>> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut out = Vec::new();
    crate::util::for_each_index(&vec![-r; d], &vec![r; d], |v| {
        if v.iter().fold(0, |g, x| gcd(g, *x)) == 1 {
            out.push(v.to_vec());
        }
    });
    out
}

impl SampledSeminorm {
    /// Values on [`l1_sphere_directions`]`(dim)`.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        let directions = l1_sphere_directions(dim);
        if values.len() != directions.len() {
            return invalid(format!("expected {} direction values, got {}", directions.len(), values.len()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("sampled seminorm values must be finite and non-negative");
        }
        Ok(Self { dim, directions, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    fn eval_unit(&self, u: &[f64]) -> f64 {
        if self.dim == 2 {
            // linear interpolation along the diamond
            let s = diamond_param(u) * 16.0;
            let j = s.floor() as usize % 64;
            let f = s - s.floor();
            return (1.0 - f) * self.values[j] + f * self.values[(j + 1) % 64];
        }
        let mut best = (f64::INFINITY, 0usize);
        for (k, dir) in self.directions.iter().enumerate() {
            let dist: f64 = dir.iter().zip(u).map(|(a, b)| (a - b).abs()).sum();
            if dist < best.0 {
                best = (dist, k);
            }
        }
        self.values[best.1]
    }
}

impl Seminorm {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            Self::ScaledL1(c) => c * l1_norm(u),
            Self::WeightedLinf(z) => z.iter().zip(u).fold(0.0, |m, (a, b)| m.max(a * b.abs())),
            Self::Max(list) => list.iter().fold(0.0, |m, g| m.max(g.eval(u))),
            Self::Sampled(s) => {
                let r = l1_norm(u);
                if r == 0.0 {
                    0.0
                } else {
                    let unit: Vec<f64> = u.iter().map(|v| v / r).collect();
                    r * s.eval_unit(&unit)
                }
            }
        }
    }

    /// `sup_{|u|_1 = 1} g(u)`.
    pub fn sup_on_l1_sphere(&self) -> f64 {
        match self {
            Self::ScaledL1(c) => *c,
            Self::WeightedLinf(z) => z.iter().fold(0.0, |m, v| m.max(*v)),
            Self::Max(list) => list.iter().fold(0.0, |m, g| m.max(g.sup_on_l1_sphere())),
            Self::Sampled(s) => s.values.iter().fold(0.0, |m, v| m.max(*v)),
        }
    }

    /// `inf_{|u|_1 = 1} g(u)`; exact except for maxima, which are sampled on
    /// a fine direction set.
    pub fn inf_on_l1_sphere(&self, d: usize) -> f64 {
        match self {
            Self::ScaledL1(c) => *c,
            Self::WeightedLinf(z) => {
                if z.contains(&0.0) {
                    0.0
                } else {
                    1.0 / z.iter().map(|v| 1.0 / v).sum::<f64>()
                }
            }
            Self::Sampled(s) => s.values.iter().fold(f64::INFINITY, |m, v| m.min(*v)),
            Self::Max(_) => dense_sphere(d).iter().map(|u| self.eval(u)).fold(f64::INFINITY, f64::min),
        }
    }

    /// `a |u|_1 <= g(u) <= b |u|_1`, with a relative slack of 1e-12.
    pub fn is_norm_valued(&self, d: usize, bounds: Bounds) -> bool {
        let tol = 1e-12 * (1.0 + bounds.b);
        self.inf_on_l1_sphere(d) >= bounds.a - tol && self.sup_on_l1_sphere() <= bounds.b + tol
    }

    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            Self::ScaledL1(_) => None,
            Self::WeightedLinf(z) => Some(z.len()),
            Self::Max(list) => list.iter().find_map(|g| g.dim_hint()),
            Self::Sampled(s) => Some(s.dim),
        }
    }
}

fn dense_sphere(d: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..4096).map(|j| diamond_point(j as f64 / 1024.0)).collect(),
        3 => {
            let m = 48;
            let mut out = Vec::new();
            for i in 0..=m {
                for j in 0..=m - i {
                    let (x, y) = (i as f64 / m as f64, j as f64 / m as f64);
                    let z = 1.0 - x - y;
                    for sx in [-1.0, 1.0] {
                        for sy in [-1.0, 1.0] {
                            for sz in [-1.0, 1.0] {
                                out.push(vec![sx * x, sy * y, sz * z]);
                            }
                        }
                    }
                }
            }
            out
        }
        _ => l1_sphere_directions(d),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ScaledL1(c) => write!(f, "l1 {c}"),
            Self::WeightedLinf(z) => write!(f, "linf {}", join(z)),
            Self::Sampled(s) => write!(f, "sampled {} {}", s.dim, join(&s.values)),
            Self::Max(list) => {
                write!(f, "max[")?;
                for (i, g) in list.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// `l1 1.5`, `linf 1 2`, `sampled 2 v0 ... v63`, `max[l1 1; linf 1.2 1.7]`.
impl FromStr for Seminorm {
    type Err = FppError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || FppError::InvalidInput(format!("bad seminorm '{s}'"));
        if let Some(inner) = s.strip_prefix("max[").and_then(|r| r.strip_suffix(']')) {
            let mut parts = Vec::new();
            let (mut depth, mut start) = (0usize, 0usize);
            for (i, ch) in inner.char_indices() {
                match ch {
                    '[' => depth += 1,
                    ']' => depth = depth.checked_sub(1).ok_or_else(bad)?,
                    ';' if depth == 0 => {
                        parts.push(inner[start..i].parse()?);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(inner[start..].parse()?);
            return Ok(Self::Max(parts));
        }
        let mut toks = s.split_whitespace();
        let kind = toks.next().ok_or_else(bad)?;
        let nums: Vec<f64> = toks.map(|t| t.parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        match kind {
            "l1" if nums.len() == 1 => Ok(Self::ScaledL1(nums[0])),
            "linf" if !nums.is_empty() => Ok(Self::WeightedLinf(nums)),
            "sampled" if !nums.is_empty() => {
                let d = nums[0] as usize;
                Ok(Self::Sampled(SampledSeminorm::new(d, nums[1..].to_vec())?))
            }
            _ => Err(bad()),
        }
    }
}

/// Piecewise-constant seminorm field on a rectilinear tiling of the
/// window's bounding box. Cells are closed; where several meet, the field
/// takes the minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    window: ConvexWindow,
    cuts: Vec<Vec<f64>>,
    cells: Vec<Seminorm>,
    bounds: Bounds,
}

impl GradientField {
    pub fn new(window: ConvexWindow, cuts: Vec<Vec<f64>>, cells: Vec<Seminorm>, bounds: Bounds) -> Result<Self> {
        let d = window.dim();
        let (lo, hi) = window.bounding_box();
        if cuts.len() != d {
            return invalid("one cut list per axis is required");
        }
        for i in 0..d {
            let c = &cuts[i];
            if c.len() < 2 || c.windows(2).any(|w| !(w[0] < w[1])) {
                return invalid("cuts must be strictly increasing with at least two entries");
            }
            if c[0] > lo[i] + 1e-12 || c[c.len() - 1] < hi[i] - 1e-12 {
                return invalid("cuts must cover the window's bounding box");
            }
        }
        let count: usize = cuts.iter().map(|c| c.len() - 1).product();
        if cells.len() != count {
            return invalid(format!("expected {count} cells, got {}", cells.len()));
        }
        for (k, g) in cells.iter().enumerate() {
            if g.dim_hint().is_some_and(|h| h != d) {
                return invalid(format!("cell {k}: seminorm dimension differs from the window"));
            }
            if !g.is_norm_valued(d, bounds) {
                return invalid(format!("cell {k}: seminorm '{g}' is not within [a|u|, b|u|]"));
            }
        }
        Ok(Self { window, cuts, cells, bounds })
    }

    pub fn constant(window: ConvexWindow, g: Seminorm, bounds: Bounds) -> Result<Self> {
        let (lo, hi) = window.bounding_box();
        let cuts = lo.iter().zip(&hi).map(|(l, h)| vec![*l, *h]).collect();
        Self::new(window, cuts, vec![g], bounds)
    }

    /// `t` equal cells per axis, cell seminorm given by its centre.
    pub fn uniform(window: ConvexWindow, t: usize, bounds: Bounds, f: impl Fn(&[f64]) -> Seminorm) -> Result<Self> {
        if t == 0 {
            return invalid("tiling resolution must be positive");
        }
        let (lo, hi) = window.bounding_box();
        let cuts: Vec<Vec<f64>> =
            lo.iter().zip(&hi).map(|(l, h)| (0..=t).map(|j| l + (h - l) * j as f64 / t as f64).collect()).collect();
        let d = lo.len();
        let mut cells = Vec::new();
        crate::util::for_each_index(&vec![0; d], &vec![t as i64 - 1; d], |c| {
            let centre: Vec<f64> = (0..d).map(|i| 0.5 * (cuts[i][c[i] as usize] + cuts[i][c[i] as usize + 1])).collect();
            cells.push(f(&centre));
        });
        Self::new(window, cuts, cells, bounds)
    }

    pub fn window(&self) -> &ConvexWindow {
        &self.window
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn cuts(&self) -> &[Vec<f64>] {
        &self.cuts
    }

    pub fn cells(&self) -> &[Seminorm] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn with_cells(&self, cells: Vec<Seminorm>) -> Result<Self> {
        Self::new(self.window.clone(), self.cuts.clone(), cells, self.bounds)
    }

    fn shape(&self) -> Vec<usize> {
        self.cuts.iter().map(|c| c.len() - 1).collect()
    }

    pub fn cell_index(&self, c: &[usize]) -> usize {
        let shape = self.shape();
        c.iter().zip(&shape).fold(0, |acc, (v, s)| acc * s + v)
    }

    pub fn cell_multi_index(&self, mut k: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        for i in (0..shape.len()).rev() {
            out[i] = k % shape[i];
            k /= shape[i];
        }
        out
    }

    pub fn cell_box(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let c = self.cell_multi_index(k);
        let lo = c.iter().enumerate().map(|(i, &j)| self.cuts[i][j]).collect();
        let hi = c.iter().enumerate().map(|(i, &j)| self.cuts[i][j + 1]).collect();
        (lo, hi)
    }

    /// Cells whose closure contains `z`.
    pub fn cells_at(&self, z: &[f64]) -> Vec<usize> {
        let per_axis: Vec<Vec<usize>> = self
            .cuts
            .iter()
            .zip(z)
            .map(|(c, &v)| {
                let n = c.len() - 1;
                let j = c.partition_point(|x| *x <= v).saturating_sub(1).min(n - 1);
                let mut list = vec![j];
                if j > 0 && c[j] == v {
                    list.push(j - 1);
                }
                if j + 1 < n && c[j + 1] == v {
                    list.push(j + 1);
                }
                list
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in per_axis {
            out = out.into_iter().flat_map(|p| axis.iter().map(move |&j| [p.clone(), vec![j]].concat())).collect();
        }
        let mut ids: Vec<usize> = out.iter().map(|c| self.cell_index(c)).collect();
        ids.sort_unstable();
        ids
    }

    pub fn eval(&self, z: &[f64], u: &[f64]) -> f64 {
        self.cells_at(z).iter().map(|&k| self.cells[k].eval(u)).fold(f64::INFINITY, f64::min)
    }

    /// Split `[p, q]` at the cuts: each piece is returned as the cells whose
    /// closure contains its midpoint, and its displacement vector.
    pub(crate) fn segment_pieces(&self, p: &[f64], q: &[f64]) -> Vec<(Vec<usize>, Vec<f64>)> {
        let step: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
        let mut ts = vec![0.0, 1.0];
        for (i, c) in self.cuts.iter().enumerate() {
            if step[i] == 0.0 {
                continue;
            }
            for &x in c {
                let t = (x - p[i]) / step[i];
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts.windows(2)
            .map(|w| {
                let tm = 0.5 * (w[0] + w[1]);
                let mid: Vec<f64> = p.iter().zip(&step).map(|(a, s)| a + tm * s).collect();
                (self.cells_at(&mid), step.iter().map(|s| s * (w[1] - w[0])).collect())
            })
            .collect()
    }

    /// Exact line integral of the field along the segment `[p, q]`.
    pub fn segment_cost(&self, p: &[f64], q: &[f64]) -> f64 {
        self.segment_pieces(p, q)
            .iter()
            .map(|(cells, piece)| cells.iter().map(|&k| self.cells[k].eval(piece)).fold(f64::INFINITY, f64::min))
            .sum()
    }
}
