//! Convex windows: axis boxes and polytopes, with the gauge, erosion,
//! tilings and Hausdorff distances used by the metric and rate modules.
//!
//! All distances are l1.

mod hausdorff;
mod polytope;

use std::fmt;
use std::str::FromStr;

pub use hausdorff::{hausdorff_l1, hausdorff_l1_bucketed};
pub use polytope::{HalfSpace, Polytope};

use crate::error::{invalid, FppError, Result};
use polytope::{centroid, dot, enumerate_vertices, EPS};

/// Convex body with non-empty interior.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexWindow {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope(Polytope),
}

/// Tiles `[v/k, (v+1)/k]` inside (`inner`) or meeting (`outer`) a window.
#[derive(Clone, Debug, PartialEq)]
pub struct TileSets {
    pub k: usize,
    pub inner: Vec<Vec<i64>>,
    pub outer: Vec<Vec<i64>>,
}

impl TileSets {
    /// `(|inner|, |outer|) / k^d`, a sandwich for the volume.
    pub fn volume_bounds(&self, d: usize) -> (f64, f64) {
        let cell = (self.k as f64).powi(d as i32);
        (self.inner.len() as f64 / cell, self.outer.len() as f64 / cell)
    }
}

impl ConvexWindow {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return invalid("box bounds must be non-empty and of equal dimension");
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u)) {
            return invalid(format!("box needs finite lower < upper, got {lower:?} {upper:?}"));
        }
        Ok(Self::Box { lower, upper })
    }

    pub fn unit_cube(d: usize) -> Self {
        Self::Box { lower: vec![0.0; d], upper: vec![1.0; d] }
    }

    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new_box(vec![lo; d], vec![hi; d])
    }

    pub fn polytope(points: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::Polytope(Polytope::from_points(points)?))
    }

    /// Closed l1 ball.
    pub fn l1_ball(center: &[f64], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return invalid("ball radius must be positive");
        }
        let mut pts = Vec::new();
        for i in 0..center.len() {
            for s in [-1.0, 1.0] {
                let mut v = center.to_vec();
                v[i] += s * radius;
                pts.push(v);
            }
        }
        Self::polytope(&pts)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::Polytope(p) => p.dim(),
        }
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Self::Box { .. })
    }

    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        match self {
            Self::Box { lower, upper } => {
                let d = lower.len();
                let mut hs = Vec::with_capacity(2 * d);
                for i in 0..d {
                    let mut n = vec![0.0; d];
                    n[i] = 1.0;
                    hs.push(HalfSpace { normal: n.clone(), offset: upper[i] });
                    n[i] = -1.0;
                    hs.push(HalfSpace { normal: n, offset: -lower[i] });
                }
                hs
            }
            Self::Polytope(p) => p.halfspaces().to_vec(),
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Box { lower, upper } => box_corners(lower, upper),
            Self::Polytope(p) => p.vertices().to_vec(),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Box { lower, upper } => (lower.clone(), upper.clone()),
            Self::Polytope(p) => {
                let d = p.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for v in p.vertices() {
                    for i in 0..d {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    fn tolerance(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        EPS * lo.iter().chain(&hi).fold(1.0f64, |m, v| m.max(v.abs()))
    }

    /// Closed membership with a small relative tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = self.tolerance();
        match self {
            Self::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            }
            Self::Polytope(p) => p.halfspaces().iter().all(|h| h.slack(x) >= -tol),
        }
    }

    /// A point well inside: the box centre or the vertex centroid.
    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            Self::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
            Self::Polytope(p) => centroid(p.vertices()),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
            Self::Polytope(p) => p.volume(),
        }
    }

    /// l1 diameter, attained at a pair of vertices.
    pub fn diameter_l1(&self) -> f64 {
        match self {
            Self::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).sum(),
            Self::Polytope(p) => {
                let v = p.vertices();
                let mut best = 0.0f64;
                for i in 0..v.len() {
                    for j in i + 1..v.len() {
                        best = best.max(l1(&v[i], &v[j]));
                    }
                }
                best
            }
        }
    }

    /// l1 distance from `z` to the complement (0 outside the window).
    pub fn dist_to_complement_l1(&self, z: &[f64]) -> f64 {
        self.halfspaces().iter().map(|h| h.slack(z) / h.linf_norm()).fold(f64::INFINITY, f64::min).max(0.0)
    }

    /// Minkowski gauge of `self - z` evaluated at `x - z`. `z` must be an
    /// interior point.
    pub fn gauge(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        let hs = self.halfspaces();
        let mut g = 0.0f64;
        for h in &hs {
            let room = h.slack(z);
            if room <= self.tolerance() {
                return invalid("gauge centre must be an interior point of the window");
            }
            let step: f64 = h.normal.iter().zip(x.iter().zip(z)).map(|(a, (xi, zi))| a * (xi - zi)).sum();
            g = g.max(step / room);
        }
        Ok(g)
    }

    /// `max_i gauge_z(z +- e_i)`, the constant for which every segment of
    /// l1 length `r` starting inside `(1 - c r) (X - z) + z` stays in `X`.
    pub fn safety_constant(&self, z: &[f64]) -> Result<f64> {
        let mut c = 0.0f64;
        for i in 0..self.dim() {
            for s in [-1.0, 1.0] {
                let mut x = z.to_vec();
                x[i] += s;
                c = c.max(self.gauge(z, &x)?);
            }
        }
        Ok(c)
    }

    /// `{ x : x + B_1(0, delta) inside X }`.
    pub fn erode(&self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return invalid("erosion radius must be non-negative");
        }
        match self {
            Self::Box { lower, upper } => {
                let lo: Vec<f64> = lower.iter().map(|v| v + delta).collect();
                let hi: Vec<f64> = upper.iter().map(|v| v - delta).collect();
                Self::new_box(lo, hi).map_err(|_| FppError::InvalidInput(format!("erosion by {delta} empties the box")))
            }
            Self::Polytope(p) => {
                let hs: Vec<HalfSpace> = p
                    .halfspaces()
                    .iter()
                    .map(|h| HalfSpace { normal: h.normal.clone(), offset: h.offset - delta * h.linf_norm() })
                    .collect();
                Polytope::from_halfspaces(&hs, p.dim())
                    .map(Self::Polytope)
                    .map_err(|_| FppError::InvalidInput(format!("erosion by {delta} empties the polytope")))
            }
        }
    }

    pub fn translate(&self, t: &[f64]) -> Self {
        match self {
            Self::Box { lower, upper } => Self::Box {
                lower: lower.iter().zip(t).map(|(a, b)| a + b).collect(),
                upper: upper.iter().zip(t).map(|(a, b)| a + b).collect(),
            },
            Self::Polytope(p) => Self::Polytope(Polytope {
                vertices: p.vertices.iter().map(|v| v.iter().zip(t).map(|(a, b)| a + b).collect()).collect(),
                halfspaces: p
                    .halfspaces
                    .iter()
                    .map(|h| HalfSpace { normal: h.normal.clone(), offset: h.offset + dot(&h.normal, t) })
                    .collect(),
            }),
        }
    }

    /// Image under `x -> lambda x`, `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Self {
        match self {
            Self::Box { lower, upper } => Self::Box {
                lower: lower.iter().map(|v| v * lambda).collect(),
                upper: upper.iter().map(|v| v * lambda).collect(),
            },
            Self::Polytope(p) => Self::Polytope(Polytope {
                vertices: p.vertices.iter().map(|v| v.iter().map(|x| x * lambda).collect()).collect(),
                halfspaces: p
                    .halfspaces
                    .iter()
                    .map(|h| HalfSpace { normal: h.normal.clone(), offset: h.offset * lambda })
                    .collect(),
            }),
        }
    }

    /// Image under `x -> z + s (x - z)`.
    pub fn homothety(&self, z: &[f64], s: f64) -> Self {
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        self.translate(&neg).scale(s).translate(z)
    }

    /// Whether the closed box `[lo, hi]` meets the window.
    pub fn meets_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        let (blo, bhi) = self.bounding_box();
        let tol = self.tolerance();
        if lo.iter().zip(&bhi).any(|(a, b)| *a > b + tol) || hi.iter().zip(&blo).any(|(a, b)| *a < b - tol) {
            return false;
        }
        let Self::Polytope(p) = self else { return true };
        let corners = box_corners(lo, hi);
        if corners.iter().any(|c| self.contains(c)) {
            return true;
        }
        if p.vertices().iter().any(|v| v.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)) {
            return true;
        }
        // a facet separating every corner means no intersection
        if p.halfspaces().iter().any(|h| corners.iter().all(|c| h.slack(c) < -tol)) {
            return false;
        }
        let mut hs = p.halfspaces().to_vec();
        for i in 0..lo.len() {
            let mut n = vec![0.0; lo.len()];
            n[i] = 1.0;
            hs.push(HalfSpace { normal: n.clone(), offset: hi[i] });
            n[i] = -1.0;
            hs.push(HalfSpace { normal: n, offset: -lo[i] });
        }
        !enumerate_vertices(&hs, lo.len()).is_empty()
    }

    /// Tiles of side `1/k` fully inside the window and tiles meeting it.
    pub fn tiles(&self, k: usize) -> Result<TileSets> {
        if k == 0 {
            return invalid("tiling resolution must be positive");
        }
        let kf = k as f64;
        let (lo, hi) = self.bounding_box();
        let first: Vec<i64> = lo.iter().map(|v| (v * kf).floor() as i64).collect();
        let last: Vec<i64> = hi.iter().map(|v| (v * kf).ceil() as i64 - 1).collect();
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        crate::util::for_each_index(&first, &last, |v| {
            let tlo: Vec<f64> = v.iter().map(|c| *c as f64 / kf).collect();
            let thi: Vec<f64> = v.iter().map(|c| (*c + 1) as f64 / kf).collect();
            if box_corners(&tlo, &thi).iter().all(|c| self.contains(c)) {
                inner.push(v.to_vec());
                outer.push(v.to_vec());
            } else if self.meets_box(&tlo, &thi) {
                outer.push(v.to_vec());
            }
        });
        Ok(TileSets { k, inner, outer })
    }
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn l1_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub(crate) fn box_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let d = lo.len();
    (0..1usize << d)
        .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect()
}

/// Whether the closed segment `[p, q]` meets the closed box `[lo, hi]`
/// (Liang-Barsky clipping).
pub fn segment_meets_box(p: &[f64], q: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for i in 0..p.len() {
        let dp = q[i] - p[i];
        if dp == 0.0 {
            if p[i] < lo[i] || p[i] > hi[i] {
                return false;
            }
            continue;
        }
        let (mut a, mut b) = ((lo[i] - p[i]) / dp, (hi[i] - p[i]) / dp);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// l1 distance between two closed boxes.
pub fn box_distance_l1(lo1: &[f64], hi1: &[f64], lo2: &[f64], hi2: &[f64]) -> f64 {
    (0..lo1.len()).map(|i| (lo2[i] - hi1[i]).max(lo1[i] - hi2[i]).max(0.0)).sum()
}

fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ConvexWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Box { lower, upper } => write!(f, "box {} {}", fmt_point(lower), fmt_point(upper)),
            Self::Polytope(p) => {
                write!(f, "polytope")?;
                for v in p.vertices() {
                    write!(f, " {}", fmt_point(v))?;
                }
                Ok(())
            }
        }
    }
}

/// `box 0,0 1,1` or `polytope 0,0 1,0 0,1`.
impl FromStr for ConvexWindow {
    type Err = FppError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let pts: Vec<Vec<f64>> = parts
            .map(|t| {
                t.split(',')
                    .map(|x| x.parse::<f64>().map_err(|_| FppError::InvalidInput(format!("bad coordinate '{x}' in window '{s}'"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        match kind {
            "box" if pts.len() == 2 => Self::new_box(pts[0].clone(), pts[1].clone()),
            "polytope" => Self::polytope(&pts),
            _ => invalid(format!("window '{s}' is neither 'box LO HI' nor 'polytope V1 V2 ...'")),
        }
    }
}
