//! Brute-force reference implementations used by the integration tests.
//! None of them call the routines they check.

#![allow(dead_code)]

use fpp_core::geometry::ConvexWindow;
use fpp_core::lattice::WeightConfiguration;

/// Minimum weight over all simple lattice paths from `x` to `y`, by
/// depth-first enumeration. Branches whose partial weight already exceeds the
/// best complete path are cut, which never changes the minimum since
/// weights are non-negative.
pub fn simple_path_min(config: &WeightConfiguration, x: &[i64], y: &[i64]) -> f64 {
    let lat = config.lattice();
    let s = lat.index_of(x).expect("x in box");
    let t = lat.index_of(y).expect("y in box");
    let d = lat.dim();
    let mut on_path = vec![false; lat.vertex_count()];
    let mut best = f64::INFINITY;

    fn walk(
        config: &WeightConfiguration,
        d: usize,
        u: usize,
        t: usize,
        acc: f64,
        on_path: &mut [bool],
        best: &mut f64,
    ) {
        if acc > *best {
            return;
        }
        if u == t {
            *best = acc;
            return;
        }
        on_path[u] = true;
        let lat = config.lattice();
        for axis in 0..d {
            for up in [false, true] {
                let Some(v) = lat.neighbor(u, axis, up) else { continue };
                if on_path[v] {
                    continue;
                }
                let e = lat.edge_between(u, v).expect("neighbours share an edge");
                walk(config, d, v, t, acc + config.weight(e), on_path, best);
            }
        }
        on_path[u] = false;
    }

    walk(config, d, s, t, 0.0, &mut on_path, &mut best);
    best
}

/// Generalised passage time between real points by a dense shortest path
/// on a refined candidate set: every point with coordinates in
/// `(1/r) Z` lying on a lattice edge of the box, plus the two queries.
/// Between any two candidates a path may jump straight at cost
/// `b |p - q|_1`; two candidates on the same edge may also ride along it at
/// cost `tau_e |p - q|_1`.
///
/// When both queries have coordinates in `(1/r) Z` this is exact: an optimal
/// path only needs to change mode at integers or at the queries'
/// coordinates.
pub fn refined_passage(config: &WeightConfiguration, x: &[f64], y: &[f64], r: i64) -> f64 {
    let lat = config.lattice();
    let d = lat.dim();
    let b = config.law().b();
    // (point, edge it lies on or None); vertices appear once per incident
    // edge, which is harmless
    let mut nodes: Vec<(Vec<f64>, Option<usize>)> = vec![(x.to_vec(), None), (y.to_vec(), None)];
    let mut edge_weight = Vec::new();
    for e in lat.edges() {
        let (u, v) = lat.edge_endpoints(e);
        let (cu, cv) = (lat.coords(u), lat.coords(v));
        let axis = (0..d).find(|&i| cu[i] != cv[i]).expect("distinct endpoints");
        let slot = edge_weight.len();
        edge_weight.push(config.weight(e));
        for s in 0..=r {
            let mut p: Vec<f64> = cu.iter().map(|&c| c as f64).collect();
            p[axis] += s as f64 / r as f64;
            nodes.push((p, Some(slot)));
        }
    }
    // queries lying on an edge can ride it too
    for q in 0..2 {
        let p = nodes[q].0.clone();
        let extra: Vec<(Vec<f64>, Option<usize>)> = lat
            .edges()
            .enumerate()
            .filter(|(_, e)| {
                let (u, v) = lat.edge_endpoints(*e);
                let (cu, cv) = (lat.coords(u), lat.coords(v));
                (0..d).all(|i| {
                    let (lo, hi) = (cu[i].min(cv[i]) as f64, cu[i].max(cv[i]) as f64);
                    lo <= p[i] && p[i] <= hi
                })
            })
            .map(|(slot, _)| (p.clone(), Some(slot)))
            .collect();
        nodes.extend(extra);
    }
    let n = nodes.len();
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum::<f64>();
    let cost = |i: usize, j: usize| {
        let len = l1(&nodes[i].0, &nodes[j].0);
        let mut c = b * len;
        if let (Some(e), Some(f)) = (nodes[i].1, nodes[j].1) {
            if e == f {
                c = c.min(edge_weight[e] * len);
            }
        }
        c
    };
    // nodes sharing a location are joined at cost 0 through the jump arc
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !done[v] && (u == usize::MAX || dist[v] < dist[u]) {
                u = v;
            }
        }
        if u == usize::MAX || !dist[u].is_finite() {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if !done[v] {
                let c = dist[u] + cost(u, v);
                if c < dist[v] {
                    dist[v] = c;
                }
            }
        }
    }
    // the target may appear several times (as a query and on edges)
    (1..n).filter(|&i| l1(&nodes[i].0, y) == 0.0).map(|i| dist[i]).fold(f64::INFINITY, f64::min)
}

/// Minkowski gauge of `window` centred at `z`, by bisection on membership.
pub fn gauge_bisection(window: &ConvexWindow, z: &[f64], x: &[f64]) -> f64 {
    if x.iter().zip(z).all(|(a, b)| a == b) {
        return 0.0;
    }
    let at = |t: f64| -> Vec<f64> { z.iter().zip(x).map(|(zi, xi)| zi + (xi - zi) / t).collect() };
    let mut hi = 1.0;
    while !window.contains(&at(hi)) {
        hi *= 2.0;
    }
    let mut lo = hi;
    while lo > 1e-300 && window.contains(&at(lo)) {
        lo *= 0.5;
    }
    if window.contains(&at(lo)) {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if window.contains(&at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// l1 Hausdorff distance by the definition.
pub fn hausdorff_naive(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let l1 = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| (u - v).abs()).sum::<f64>();
    let side = |s: &[Vec<f64>], t: &[Vec<f64>]| {
        s.iter().map(|p| t.iter().map(|q| l1(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0f64, f64::max)
    };
    side(a, b).max(side(b, a))
}
