//! Discretisation of continuous curves into nearest-neighbour lattice paths
//! and insertion of fast highways along them.
//!
//! A curve `sigma` is blown up to `lambda sigma + z`, with `z` a random shift
//! in the open unit l1 ball. Each coordinate of the lattice path tracks the
//! last integer visited by the matching coordinate of the curve (initially
//! its floor); every change of one coordinate is a jump to a neighbouring
//! vertex. A touch of an integer counts as a visit. The random shift makes
//! simultaneous visits by two coordinates a null event; shifts producing
//! one are redrawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, FppError, Result};
use crate::geometry::l1;
use crate::lattice::{EdgeId, WeightConfiguration};

/// Piecewise-linear curve through `points` at increasing `times`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCurve {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl PolyCurve {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return invalid("a curve needs at least two points, one time per point");
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return invalid("curve points must be finite and share one dimension");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("curve times must be strictly increasing");
        }
        Ok(Self { times, points })
    }

    /// Parametrised by l1 arclength from 0.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let mut times = vec![0.0];
        let mut kept = vec![points.first().cloned().ok_or_else(|| FppError::InvalidInput("empty curve".into()))?];
        for p in points.into_iter().skip(1) {
            let len = l1(kept.last().unwrap(), &p);
            if len > 0.0 {
                times.push(times.last().unwrap() + len);
                kept.push(p);
            }
        }
        Self::new(times, kept)
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(self.start_time(), self.end_time());
        let k = self.times.partition_point(|s| *s <= t).clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let f = (t - t0) / (t1 - t0);
        self.points[k - 1].iter().zip(&self.points[k]).map(|(a, b)| a + f * (b - a)).collect()
    }

    /// l1 length of the curve restricted to `[start, t]`.
    pub fn length_until(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 1..self.times.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            if t <= t0 {
                break;
            }
            let seg = l1(&self.points[k - 1], &self.points[k]);
            acc += seg * ((t.min(t1) - t0) / (t1 - t0));
        }
        acc
    }

    pub fn l1_length(&self) -> f64 {
        self.points.windows(2).map(|w| l1(&w[0], &w[1])).sum()
    }
}

/// Lattice path `alpha` with the jump times of the discretisation.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedPath {
    pub lambda: f64,
    pub shift: Vec<f64>,
    /// `vertices[j]` is occupied from `jump_times[j-1]` on.
    pub vertices: Vec<Vec<i64>>,
    pub jump_times: Vec<f64>,
    pub redraws: usize,
}

impl DiscretizedPath {
    /// Number of jumps at instants `<= t`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jump_times.partition_point(|s| *s <= t)
    }

    pub fn vertex_at(&self, t: f64) -> &[i64] {
        &self.vertices[self.jumps_until(t)]
    }
}

const MAX_REDRAWS: usize = 1000;

struct Event {
    time: f64,
    axis: usize,
    value: i64,
}

fn jump_events(curve: &PolyCurve, lambda: f64, z: &[f64]) -> (Vec<i64>, Vec<Event>) {
    let d = curve.dim();
    let v = |k: usize, i: usize| lambda * curve.points[k][i] + z[i];
    let start: Vec<i64> = (0..d).map(|i| v(0, i).floor() as i64).collect();
    let mut events = Vec::new();
    for i in 0..d {
        let mut hat = start[i];
        for k in 1..curve.points.len() {
            let (va, vb) = (v(k - 1, i), v(k, i));
            let (ta, tb) = (curve.times[k - 1], curve.times[k]);
            if va == vb {
                continue;
            }
            let at = |m: i64| ta + (m as f64 - va) / (vb - va) * (tb - ta);
            // integers reached in (ta, tb], in visiting order
            let visits: Box<dyn Iterator<Item = i64>> = if vb > va {
                Box::new(va.floor() as i64 + 1..=vb.floor() as i64)
            } else {
                Box::new((vb.ceil() as i64..=va.ceil() as i64 - 1).rev())
            };
            for m in visits {
                if m != hat {
                    events.push(Event { time: at(m), axis: i, value: m });
                    hat = m;
                }
            }
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.axis.cmp(&b.axis)));
    (start, events)
}

/// Discretise `curve` at scale `lambda` with a random shift drawn from
/// `shift_seed`.
pub fn discretize_path(curve: &PolyCurve, lambda: f64, shift_seed: u64) -> Result<DiscretizedPath> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid("scale lambda must be positive");
    }
    let d = curve.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(shift_seed);
    let span = curve.end_time() - curve.start_time();
    for redraws in 0..MAX_REDRAWS {
        let z: Vec<f64> = loop {
            let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if z.iter().map(|x: &f64| x.abs()).sum::<f64>() < 1.0 {
                break z;
            }
        };
        let (start, events) = jump_events(curve, lambda, &z);
        let tol = 1e-12 * (1.0 + span.abs());
        if events.windows(2).any(|w| w[0].axis != w[1].axis && (w[1].time - w[0].time).abs() <= tol) {
            continue;
        }
        let mut vertices = vec![start];
        let mut jump_times = Vec::with_capacity(events.len());
        for e in events {
            let mut next = vertices.last().unwrap().clone();
            next[e.axis] = e.value;
            vertices.push(next);
            jump_times.push(e.time);
        }
        return Ok(DiscretizedPath { lambda, shift: z, vertices, jump_times, redraws });
    }
    Err(FppError::InvariantViolation("could not draw a shift without simultaneous crossings".into()))
}

/// Result of [`insert_highway`].
#[derive(Clone, Debug, PartialEq)]
pub struct Highway {
    pub config: WeightConfiguration,
    pub edges: Vec<EdgeId>,
    pub modified: usize,
}

/// Set every edge of the lattice path to `min(old, level)`.
pub fn insert_highway(config: &WeightConfiguration, path: &DiscretizedPath, level: f64) -> Result<Highway> {
    let law = config.law();
    if !(law.a() <= level && level <= law.b()) {
        return invalid(format!("highway level {level} must lie in [a, b] = [{}, {}]", law.a(), law.b()));
    }
    let lat = config.lattice();
    let mut edges = Vec::with_capacity(path.vertices.len());
    for w in path.vertices.windows(2) {
        let e = lat
            .edge_between_points(&w[0], &w[1])
            .ok_or_else(|| FppError::InvalidInput(format!("path step {:?} -> {:?} leaves the box", w[0], w[1])))?;
        edges.push(e);
    }
    let mut distinct = edges.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let changes: Vec<(EdgeId, f64)> =
        distinct.iter().filter(|e| config.weight(**e) > level).map(|&e| (e, level)).collect();
    let modified = changes.len();
    Ok(Highway { config: config.with_edges(&changes)?, edges, modified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_jumps_once_per_integer() {
        let c = PolyCurve::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let p = discretize_path(&c, 10.0, 3).unwrap();
        assert!((9..=11).contains(&(p.vertices.len() - 1)));
        for w in p.vertices.windows(2) {
            assert_eq!(w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<i64>(), 1);
        }
    }

    #[test]
    fn back_and_forth_does_not_jump_inside_a_cell() {
        let c = PolyCurve::from_points(vec![vec![0.0], vec![0.02], vec![0.0], vec![0.02]]).unwrap();
        let p = discretize_path(&c, 1.0, 11).unwrap();
        assert!(p.vertices.len() <= 3);
    }
}
