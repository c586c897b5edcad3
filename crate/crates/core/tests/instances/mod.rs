//! Random instance generators shared by the integration tests and the
//! acceptance target.

#![allow(dead_code)]

use fpp_core::geometry::{l1, l1_norm, ConvexWindow};
use fpp_core::lattice::{sample_configuration, BoundedLaw, LatticeBox};
use fpp_core::metric::{prescribe_metric, stitch_metrics, Bounds, CorridorSetup, GradientField, GridMetric, Seminorm};
use fpp_core::passage::rescaled_metric;
use fpp_core::path_tools::{discretize_path, PolyCurve};
use fpp_core::rng::uniform;

pub fn unit_bounds() -> Bounds {
    Bounds::new(1.0, 2.0).unwrap()
}

/// Scaled-l1 field with `t` tiles per axis and levels uniform in [1, 2].
pub fn random_field(window: &ConvexWindow, t: usize, seed: u64) -> GradientField {
    let counter = std::cell::Cell::new(0u64);
    GradientField::uniform(window.clone(), t, unit_bounds(), |_| {
        let c = counter.get();
        counter.set(c + 1);
        Seminorm::ScaledL1(1.0 + uniform(seed, 0, c))
    })
    .unwrap()
}

/// Tiles on a regular pattern of the unit square with `gap` between them,
/// fast pieces inside and a slower ambient piece everywhere.
pub fn corridor_instance(seed: u64) -> (GridMetric, GridMetric, CorridorSetup) {
    let u = |c: u64| uniform(seed, 7, c);
    let m = 8usize;
    let per_axis = 2usize;
    let gap = 0.25;
    let size = (1.0 - gap * (per_axis - 1) as f64) / per_axis as f64;
    let bounds = unit_bounds();
    let target_level = 1.0 + 0.8 * u(0);
    let eps = 0.05 + 0.4 * u(1);
    let target = GridMetric::from_norm(&ConvexWindow::unit_cube(2), m, |v| target_level * l1_norm(v), bounds).unwrap();
    let mut tiles = Vec::new();
    let mut pieces = Vec::new();
    let mut delta2: f64 = 0.0;
    for i in 0..per_axis {
        for j in 0..per_axis {
            let lo = vec![i as f64 * (size + gap), j as f64 * (size + gap)];
            let hi: Vec<f64> = lo.iter().map(|v| v + size).collect();
            let tile = ConvexWindow::new_box(lo.clone(), hi.clone()).unwrap();
            let level = (target_level - 0.3 * u(2 + (i * per_axis + j) as u64)).max(1.0);
            delta2 = delta2.max((target_level - level) * tile.diameter_l1());
            pieces.push(GridMetric::from_norm(&tile, 3, |v| level * l1_norm(v), bounds).unwrap());
            tiles.push((lo, hi));
        }
    }
    let corridor_level = bounds.b - eps * u(20);
    let ambient = GridMetric::from_norm(&ConvexWindow::unit_cube(2), m, |v| corridor_level * l1_norm(v), bounds).unwrap();
    pieces.push(ambient);
    let refs: Vec<&GridMetric> = pieces.iter().collect();
    let candidate = stitch_metrics(&ConvexWindow::unit_cube(2), m, &refs, bounds).unwrap();
    (target, candidate, CorridorSetup { tiles, delta1: gap, delta2, eps })
}

/// Two metrics on the 8-grid of [-1, 1]^2: rescaled passage times of two
/// independent configurations (even seeds) or two prescribed random fields
/// (odd seeds).
pub fn ball_pair(seed: u64) -> (GridMetric, GridMetric) {
    let w = ConvexWindow::cube(2, -1.0, 1.0).unwrap();
    if seed.is_multiple_of(2) {
        let law = BoundedLaw::two_point(1.0, 2.0, 0.5).unwrap();
        let lat = LatticeBox::new(vec![-4, -4], vec![4, 4]).unwrap();
        let mk = |s| {
            let c = sample_configuration(&lat, &law, seed, s).unwrap();
            rescaled_metric(&c, &w, 4, 8).unwrap()
        };
        (mk(0), mk(1))
    } else {
        (prescribe_metric(&random_field(&w, 4, seed), 8).unwrap(), prescribe_metric(&random_field(&w, 4, seed + 1000), 8).unwrap())
    }
}

pub const CURVE_MESH: usize = 10_000;

/// Polygonal curve with 1 to 6 pieces in the unit cube.
pub fn random_curve(seed: u64, d: usize) -> PolyCurve {
    let pieces = 1 + (uniform(seed, 0, 0) * 6.0) as usize;
    let pts: Vec<Vec<f64>> = (0..=pieces).map(|k| (0..d).map(|i| uniform(seed, 1, (k * d + i) as u64)).collect()).collect();
    PolyCurve::from_points(pts).unwrap()
}

/// Violations of the discretisation bounds found by scanning the curve on
/// a uniform mesh of its time interval: distance to `lambda sigma(t)` above
/// `d + 1`, or more jumps over a window than its scaled length plus `d`.
/// Steps that are not unit moves also count.
pub fn curve_violations(curve: &PolyCurve, lambda: f64, seed: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let d = curve.dim();
    let p = discretize_path(curve, lambda, seed).unwrap();
    for w in p.vertices.windows(2) {
        if w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<i64>() != 1 {
            bad.push(format!("non-unit step {:?} -> {:?}", w[0], w[1]));
        }
    }
    let (t0, t1) = (curve.start_time(), curve.end_time());
    let ts: Vec<f64> = (0..=CURVE_MESH).map(|i| t0 + (t1 - t0) * i as f64 / CURVE_MESH as f64).collect();
    let jumps: Vec<usize> = ts.iter().map(|t| p.jumps_until(*t)).collect();
    if jumps.windows(2).any(|w| w[0] > w[1]) {
        bad.push("jump counter decreases".into());
    }
    for (i, t) in ts.iter().enumerate() {
        let target: Vec<f64> = curve.at(*t).iter().map(|v| lambda * v).collect();
        let here: Vec<f64> = p.vertices[jumps[i]].iter().map(|v| *v as f64).collect();
        if l1(&here, &target) > (d + 1) as f64 {
            bad.push(format!("t={t}: distance {}", l1(&here, &target)));
        }
    }
    // jump counts over windows of several widths
    for width in [1usize, 10, 100, 1000, CURVE_MESH] {
        for s in (0..=CURVE_MESH - width).step_by(width.max(7) / 7) {
            let e = s + width;
            let count = jumps[e] - jumps[s];
            let len = lambda * (curve.length_until(ts[e]) - curve.length_until(ts[s]));
            if count as f64 > len + d as f64 + 1e-9 {
                bad.push(format!("{count} jumps over length {len}"));
            }
        }
    }
    if jumps[CURVE_MESH] != p.jump_times.len() {
        bad.push("path not fully covered".into());
    }
    bad
}
