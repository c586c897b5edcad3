use std::collections::HashMap;

use super::l1;

fn one_sided(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().map(|p| b.iter().map(|q| l1(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// l1 Hausdorff distance between finite point sets, by brute force.
pub fn hausdorff_l1(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    one_sided(a, b).max(one_sided(b, a))
}

struct Buckets<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    lo: Vec<f64>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    extent: i64,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Vec<f64>], cell: f64) -> Self {
        let d = points[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let key = |p: &[f64]| -> Vec<i64> { p.iter().zip(&lo).map(|(x, l)| ((x - l) / cell).floor() as i64).collect() };
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p)).or_default().push(i);
        }
        let extent = lo.iter().zip(&hi).map(|(l, h)| ((h - l) / cell).ceil() as i64 + 1).max().unwrap_or(1);
        Self { points, cell, lo, cells, extent }
    }

    fn nearest(&self, p: &[f64]) -> f64 {
        let d = p.len();
        let home: Vec<i64> = p.iter().zip(&self.lo).map(|(x, l)| ((x - l) / self.cell).floor() as i64).collect();
        let offset = home.iter().map(|h| h.abs().max((h - self.extent).abs())).max().unwrap_or(0);
        let mut best = f64::INFINITY;
        let mut r: i64 = 0;
        loop {
            // visit cells at Chebyshev distance exactly r from home
            let mut delta = vec![-r; d];
            loop {
                if delta.iter().any(|v| v.abs() == r) {
                    let key: Vec<i64> = home.iter().zip(&delta).map(|(h, o)| h + o).collect();
                    if let Some(ids) = self.cells.get(&key) {
                        for &i in ids {
                            best = best.min(l1(p, &self.points[i]));
                        }
                    }
                }
                let mut i = d;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    if delta[i] < r {
                        delta[i] += 1;
                        delta[i + 1..].iter_mut().for_each(|v| *v = -r);
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
            // unvisited cells are at l-inf (hence l1) distance >= r * cell
            if best <= r as f64 * self.cell || r > offset + self.extent {
                return best;
            }
            r += 1;
        }
    }
}

/// Same value as [`hausdorff_l1`], bit for bit, using a bucket grid of
/// side `cell` to prune the nearest-neighbour scans.
pub fn hausdorff_l1_bucketed(a: &[Vec<f64>], b: &[Vec<f64>], cell: f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return hausdorff_l1(a, b);
    }
    let ba = Buckets::new(a, cell);
    let bb = Buckets::new(b, cell);
    let ab = a.iter().map(|p| bb.nearest(p)).fold(0.0, f64::max);
    let ba_ = b.iter().map(|p| ba.nearest(p)).fold(0.0, f64::max);
    ab.max(ba_)
}
