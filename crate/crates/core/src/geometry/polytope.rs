//! Polytopes in dimension 2 and 3, held as vertices plus halfspaces.

use crate::error::{invalid, Result};

pub(crate) const EPS: f64 = 1e-10;

/// `normal . x <= offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }

    pub fn linf_norm(&self) -> f64 {
        self.normal.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub(crate) vertices: Vec<Vec<f64>>,
    pub(crate) halfspaces: Vec<HalfSpace>,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

impl Polytope {
    /// Convex hull of a point cloud. The hull must be full-dimensional.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return invalid("polytope points must be finite and share one dimension");
        }
        match d {
            2 => hull_2d(points),
            3 => hull_3d(points),
            _ => Err(crate::FppError::Unsupported(format!("polytopes are supported in dimension 2 and 3, got {d}"))),
        }
    }

    /// Bounded intersection of halfspaces.
    pub fn from_halfspaces(halfspaces: &[HalfSpace], d: usize) -> Result<Self> {
        let verts = enumerate_vertices(halfspaces, d);
        if verts.len() <= d {
            return invalid("halfspace intersection is empty or degenerate");
        }
        Self::from_points(&verts)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn volume(&self) -> f64 {
        match self.dim() {
            2 => {
                // vertices are in counter-clockwise order
                let v = &self.vertices;
                let n = v.len();
                0.5 * (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>()
            }
            _ => {
                let c = centroid(&self.vertices);
                let mut vol = 0.0;
                for h in &self.halfspaces {
                    let face = self.facet_polygon(h);
                    for i in 1..face.len().saturating_sub(1) {
                        let a = sub(&face[0], &c);
                        let b = sub(&face[i], &c);
                        let e = sub(&face[i + 1], &c);
                        vol += dot(&a, &cross(&b, &e)).abs() / 6.0;
                    }
                }
                vol
            }
        }
    }

    /// Vertices on the supporting plane of `h`, ordered around the facet.
    fn facet_polygon(&self, h: &HalfSpace) -> Vec<Vec<f64>> {
        let tol = EPS * scale_of(&self.vertices);
        let mut face: Vec<Vec<f64>> = self.vertices.iter().filter(|v| h.slack(v).abs() <= tol).cloned().collect();
        let c = centroid(&face);
        let n = &h.normal;
        let pick = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let u = cross(n, &pick);
        let w = cross(n, &u);
        face.sort_by(|p, q| {
            let (pp, qq) = (sub(p, &c), sub(q, &c));
            let ap = dot(&pp, &w).atan2(dot(&pp, &u));
            let aq = dot(&qq, &w).atan2(dot(&qq, &u));
            ap.total_cmp(&aq)
        });
        face
    }
}

pub(crate) fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let mut c = vec![0.0; d];
    for p in points {
        for i in 0..d {
            c[i] += p[i];
        }
    }
    c.iter_mut().for_each(|v| *v /= points.len() as f64);
    c
}

fn hull_2d(points: &[Vec<f64>]) -> Result<Polytope> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return invalid("a polygon needs at least three distinct points");
    }
    let turn = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let tol = EPS * scale_of(points).powi(2);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return invalid("polygon is degenerate (zero area)");
    }
    let n = hull.len();
    let halfspaces = (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            // outward normal of a counter-clockwise edge
            let normal = [b[1] - a[1], a[0] - b[0]];
            let len = normal[0].abs().max(normal[1].abs());
            let normal = vec![normal[0] / len, normal[1] / len];
            HalfSpace { offset: dot(&normal, &a), normal }
        })
        .collect();
    Ok(Polytope { vertices: hull.iter().map(|p| p.to_vec()).collect(), halfspaces })
}

fn hull_3d(points: &[Vec<f64>]) -> Result<Polytope> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.iter().zip(b).fold(std::cmp::Ordering::Equal, |o, (x, y)| o.then(x.total_cmp(y))));
    pts.dedup();
    let tol = EPS * scale_of(&pts);
    let mut halfspaces: Vec<HalfSpace> = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = cross(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                let len = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if len <= tol * tol {
                    continue;
                }
                let mut normal: Vec<f64> = c.iter().map(|v| v / len).collect();
                let mut offset = dot(&normal, &pts[i]);
                let (mut above, mut below) = (false, false);
                for p in &pts {
                    let s = dot(&normal, p) - offset;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                if above {
                    normal.iter_mut().for_each(|v| *v = -*v);
                    offset = -offset;
                }
                let dup = halfspaces.iter().any(|h| {
                    (h.offset - offset).abs() <= tol && h.normal.iter().zip(&normal).all(|(a, b)| (a - b).abs() <= 1e-9)
                });
                if !dup {
                    halfspaces.push(HalfSpace { normal, offset });
                }
            }
        }
    }
    if halfspaces.len() < 4 {
        return invalid("polytope is degenerate (zero volume)");
    }
    // keep only points lying on at least three facets
    let vertices: Vec<Vec<f64>> = pts
        .into_iter()
        .filter(|p| halfspaces.iter().filter(|h| h.slack(p).abs() <= tol).count() >= 3)
        .collect();
    Ok(Polytope { vertices, halfspaces })
}

/// Solve `A x = b` for a small square system; `None` when singular.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// All feasible intersection points of `d` bounding hyperplanes.
pub(crate) fn enumerate_vertices(halfspaces: &[HalfSpace], d: usize) -> Vec<Vec<f64>> {
    let m = halfspaces.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    if m < d {
        return out;
    }
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| halfspaces[i].normal.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| halfspaces[i].offset).collect();
        if let Some(x) = solve(a, b) {
            let tol = EPS * (1.0 + x.iter().fold(0.0f64, |s, v| s.max(v.abs())));
            if halfspaces.iter().all(|h| h.slack(&x) >= -tol)
                && !out.iter().any(|p| p.iter().zip(&x).all(|(u, v)| (u - v).abs() <= tol))
            {
                out.push(x);
            }
        }
        // next combination
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - d + k {
                idx[k] += 1;
                for j in k + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
