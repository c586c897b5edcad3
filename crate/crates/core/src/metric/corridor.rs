//! Corridor lower bound.
//!
//! If the window is covered by well separated tiles on which a candidate
//! metric `D'` is almost above a target `D`, and `D'` is almost `b |.|_1`
//! in the corridors between them, then `D' >= D - 3 diam(X) (eps +
//! delta2/delta1)` everywhere.

use super::build::restrict_metric;
use super::grid::GridMetric;
use crate::error::{invalid, Result};
use crate::geometry::{box_distance_l1, l1, segment_meets_box, ConvexWindow};

#[derive(Clone, Debug, PartialEq)]
pub struct CorridorSetup {
    /// Closed axis-parallel tiles `(lower, upper)`.
    pub tiles: Vec<(Vec<f64>, Vec<f64>)>,
    /// Minimal l1 gap between two tiles.
    pub delta1: f64,
    /// Allowed deficit of `D'` below `D` inside a tile.
    pub delta2: f64,
    /// Allowed deficit of `D'` below `b |.|_1` in the corridors.
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorridorReport {
    pub min_tile_gap: f64,
    pub width_ok: bool,
    pub control_pairs: usize,
    pub control_violations: usize,
    pub worst_control: f64,
    pub intensity_pairs: usize,
    pub intensity_violations: usize,
    pub worst_intensity: f64,
}

impl CorridorReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.width_ok && self.control_violations == 0 && self.intensity_violations == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorridorCertificate {
    pub report: CorridorReport,
    /// `3 diam(X) (eps + delta2 / delta1)`.
    pub offset: f64,
    /// `min (D' - (D - offset))` over grid pairs.
    pub min_margin: f64,
    pub violations: usize,
}

impl CorridorSetup {
    fn validate(&self, target: &GridMetric) -> Result<()> {
        let b = target.bounds().b;
        let diam = target.window().diameter_l1();
        if !(self.eps > 0.0 && self.eps < 0.5 * b) {
            return invalid(format!("corridor eps must lie in (0, b/2), got {}", self.eps));
        }
        if !(self.delta1 > 0.0 && self.delta1 <= diam) {
            return invalid(format!("delta1 must lie in (0, diam X], got {}", self.delta1));
        }
        if !(self.delta2 >= 0.0) {
            return invalid("delta2 must be non-negative");
        }
        if self.tiles.is_empty() {
            return invalid("at least one tile is required");
        }
        Ok(())
    }

    pub fn offset(&self, window: &ConvexWindow) -> f64 {
        3.0 * window.diameter_l1() * (self.eps + self.delta2 / self.delta1)
    }
}

/// `D - 3 diam(X) (eps + delta2/delta1)` on the grid of `target`.
pub fn corridor_lower_bound(target: &GridMetric, setup: &CorridorSetup) -> Result<Vec<f64>> {
    setup.validate(target)?;
    let off = setup.offset(target.window());
    Ok(target.values().iter().map(|v| v - off).collect())
}

fn tol(m: &GridMetric) -> f64 {
    10.0 * m.tolerance()
}

/// Check the three hypotheses on the grid of `candidate`: tile separation,
/// control inside tiles (through the restriction of `candidate` to each
/// tile), and intensity along neighbour segments avoiding every tile.
pub fn check_corridor_hypotheses(target: &GridMetric, candidate: &GridMetric, setup: &CorridorSetup) -> Result<CorridorReport> {
    setup.validate(target)?;
    if !target.grid().matches(candidate.grid()) {
        return invalid("target and candidate must share a grid");
    }
    let t = tol(candidate);
    let mut min_gap = f64::INFINITY;
    for i in 0..setup.tiles.len() {
        for j in i + 1..setup.tiles.len() {
            let (a, b) = (&setup.tiles[i], &setup.tiles[j]);
            min_gap = min_gap.min(box_distance_l1(&a.0, &a.1, &b.0, &b.1));
        }
    }
    let width_ok = min_gap >= setup.delta1 - t;

    let (mut control_pairs, mut control_violations, mut worst_control) = (0, 0, 0.0f64);
    for (lo, hi) in &setup.tiles {
        let tile = ConvexWindow::new_box(lo.clone(), hi.clone())?;
        let restricted = restrict_metric(candidate, &tile)?;
        let rg = restricted.grid();
        let idx: Vec<usize> = (0..rg.len()).map(|i| target.grid().locate(&rg.point(i)).expect("shared grid")).collect();
        for i in 0..rg.len() {
            for j in i + 1..rg.len() {
                control_pairs += 1;
                let deficit = target.get(idx[i], idx[j]) - setup.delta2 - restricted.get(i, j);
                worst_control = worst_control.max(deficit);
                if deficit > t {
                    control_violations += 1;
                }
            }
        }
    }

    let b = candidate.bounds().b;
    let g = candidate.grid();
    let d = g.dim();
    let offsets: Vec<Vec<i64>> = {
        let mut v = Vec::new();
        crate::util::for_each_index(&vec![-1; d], &vec![1; d], |o| {
            if o.iter().find(|x| **x != 0).is_some_and(|x| *x > 0) {
                v.push(o.to_vec());
            }
        });
        v
    };
    let (mut intensity_pairs, mut intensity_violations, mut worst_intensity) = (0, 0, 0.0f64);
    for i in 0..g.len() {
        let p = g.point(i);
        for o in &offsets {
            let c: Vec<i64> = g.coords(i).iter().zip(o).map(|(a, b)| a + b).collect();
            let Some(j) = g.index_of(&c) else { continue };
            let q = g.point(j);
            if setup.tiles.iter().any(|(lo, hi)| segment_meets_box(&p, &q, lo, hi)) {
                continue;
            }
            intensity_pairs += 1;
            let deficit = (b - setup.eps) * l1(&p, &q) - candidate.get(i, j);
            worst_intensity = worst_intensity.max(deficit);
            if deficit > t {
                intensity_violations += 1;
            }
        }
    }
    Ok(CorridorReport {
        min_tile_gap: min_gap,
        width_ok,
        control_pairs,
        control_violations,
        worst_control,
        intensity_pairs,
        intensity_violations,
        worst_intensity,
    })
}

/// Hypothesis report plus the bound itself checked on every grid pair.
pub fn certify_corridor(target: &GridMetric, candidate: &GridMetric, setup: &CorridorSetup) -> Result<CorridorCertificate> {
    let report = check_corridor_hypotheses(target, candidate, setup)?;
    let bound = corridor_lower_bound(target, setup)?;
    let t = tol(candidate);
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for (c, lb) in candidate.values().iter().zip(&bound) {
        let m = c - lb;
        min_margin = min_margin.min(m);
        if m < -t {
            violations += 1;
        }
    }
    Ok(CorridorCertificate { report, offset: setup.offset(target.window()), min_margin, violations })
}
