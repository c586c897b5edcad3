//! Finite graph on which the continuum passage time between real points is
//! computed exactly.
//!
//! Besides the lattice vertices it contains, for every axis `i`, points on
//! axis-`i` edges at each non-integer coordinate value some query point (or
//! box-window bound) has along axis `i`, and the query points with two or
//! more fractional coordinates. Arcs are rides along edges (cost
//! `tau_e * length`), unit jumps between matching points of parallel edges
//! (cost `b`), and jumps from a multi-fractional query point to the corners
//! and edge points of its closed cell (cost `b * l1`). An optimal
//! jump/ride sequence can always be moved onto these candidates without
//! increasing its cost, because the cost is piecewise linear in the free
//! coordinates with breakpoints only at integers and query coordinates.

use std::collections::{BTreeMap, HashMap};

use super::graph::{dijkstra, ArcLists, Csr, ShortestPaths, Stop};
use crate::error::{invalid, FppError, Result};
use crate::geometry::{l1, ConvexWindow};
use crate::lattice::{LatticeBox, WeightConfiguration};

const NODE_LIMIT: usize = 40_000_000;

pub(crate) struct AugmentedGraph {
    csr: Csr,
    lattice: LatticeBox,
    extra_points: Vec<Vec<f64>>,
    query_nodes: Vec<usize>,
}

fn is_integer(v: f64) -> bool {
    v.fract() == 0.0
}

impl AugmentedGraph {
    pub fn build(config: &WeightConfiguration, window: Option<&ConvexWindow>, queries: &[Vec<f64>]) -> Result<Self> {
        let lattice = config.lattice().clone();
        let d = lattice.dim();
        let b = config.law().b();
        let nv = lattice.vertex_count();
        if let Some(w) = window {
            if w.dim() != d {
                return invalid("window and lattice dimensions differ");
            }
        }
        for q in queries {
            if q.len() != d || q.iter().any(|v| !v.is_finite()) {
                return invalid(format!("point {q:?} is not a finite point of R^{d}"));
            }
            if !lattice.contains_point(q) {
                return invalid(format!("point {q:?} lies outside the configuration box"));
            }
            if let Some(w) = window {
                if !w.contains(q) {
                    return invalid(format!("point {q:?} lies outside the window"));
                }
            }
        }

        let mut coords = vec![0i64; d];
        let mut point = vec![0.0; d];
        let allowed: Vec<bool> = match window {
            None => vec![true; nv],
            Some(w) => (0..nv)
                .map(|v| {
                    lattice.coords_into(v, &mut coords);
                    coords.iter().zip(point.iter_mut()).for_each(|(c, p)| *p = *c as f64);
                    w.contains(&point)
                })
                .collect(),
        };

        // fractional positions per axis, grouped by their floor
        let mut frac: Vec<BTreeMap<i64, Vec<f64>>> = vec![BTreeMap::new(); d];
        let mut add_pos = |i: usize, p: f64| {
            if !is_integer(p) && lattice.lower()[i] as f64 <= p && p <= lattice.upper()[i] as f64 {
                let list = frac[i].entry(p.floor() as i64).or_default();
                if !list.contains(&p) {
                    list.push(p);
                }
            }
        };
        for q in queries {
            for (i, &v) in q.iter().enumerate() {
                add_pos(i, v);
            }
        }
        if let Some(ConvexWindow::Box { lower, upper }) = window {
            for i in 0..d {
                add_pos(i, lower[i]);
                add_pos(i, upper[i]);
            }
        }
        for m in &mut frac {
            for list in m.values_mut() {
                list.sort_by(f64::total_cmp);
            }
        }
        let estimate: usize = (0..d)
            .map(|i| {
                let side = (lattice.upper()[i] - lattice.lower()[i] + 1) as usize;
                frac[i].values().map(|l| l.len()).sum::<usize>() * (nv / side)
            })
            .sum::<usize>()
            + nv;
        if estimate > NODE_LIMIT {
            return Err(FppError::Budget {
                what: "augmented graph nodes".into(),
                required: estimate as f64,
                limit: NODE_LIMIT as f64,
            });
        }

        let mut arcs = ArcLists::new(nv);
        for v in 0..nv {
            if !allowed[v] {
                continue;
            }
            for axis in 0..d {
                if let Some(w) = lattice.neighbor(v, axis, true) {
                    if allowed[w] {
                        arcs.connect(v, w, config.weight_up(v, axis));
                    }
                }
            }
        }

        let mut extra_points: Vec<Vec<f64>> = Vec::new();
        let mut edge_points: HashMap<(usize, usize, u64), usize> = HashMap::new();
        let mut edge_point_list: Vec<(usize, usize, f64, usize)> = Vec::new();
        for axis in 0..d {
            if frac[axis].is_empty() {
                continue;
            }
            for v in 0..nv {
                let m = lattice.coord(v, axis);
                let Some(list) = frac[axis].get(&m) else { continue };
                let Some(w) = lattice.neighbor(v, axis, true) else { continue };
                let tau = config.weight_up(v, axis);
                lattice.coords_into(v, &mut coords);
                let mut chain: Vec<(usize, f64)> = Vec::with_capacity(list.len() + 2);
                if allowed[v] {
                    chain.push((v, m as f64));
                }
                for &p in list {
                    let mut x: Vec<f64> = coords.iter().map(|c| *c as f64).collect();
                    x[axis] = p;
                    if window.is_none_or(|win| win.contains(&x)) {
                        let node = arcs.add_node();
                        extra_points.push(x);
                        edge_points.insert((v, axis, p.to_bits()), node);
                        edge_point_list.push((v, axis, p, node));
                        chain.push((node, p));
                    }
                }
                if allowed[w] {
                    chain.push((w, (m + 1) as f64));
                }
                for pair in chain.windows(2) {
                    arcs.connect(pair[0].0, pair[1].0, tau * (pair[1].1 - pair[0].1));
                }
            }
        }
        for &(v, axis, p, node) in &edge_point_list {
            for k in 0..d {
                if k == axis {
                    continue;
                }
                if let Some(w) = lattice.neighbor(v, k, true) {
                    if let Some(&other) = edge_points.get(&(w, axis, p.to_bits())) {
                        arcs.connect(node, other, b);
                    }
                }
            }
        }

        let mut query_nodes = Vec::with_capacity(queries.len());
        let mut multi: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut multi_index: HashMap<Vec<u64>, usize> = HashMap::new();
        let floor_of = |q: &[f64]| -> Vec<i64> { q.iter().map(|v| v.floor() as i64).collect() };
        for q in queries {
            let fractional: Vec<usize> = (0..d).filter(|&i| !is_integer(q[i])).collect();
            let base = floor_of(q);
            let node = match fractional.len() {
                0 => lattice.index_of(&base).expect("query inside the box"),
                1 => {
                    let i = fractional[0];
                    let v = lattice.index_of(&base).expect("query inside the box");
                    *edge_points.get(&(v, i, q[i].to_bits())).expect("edge point for query")
                }
                _ => {
                    let key: Vec<u64> = q.iter().map(|v| v.to_bits()).collect();
                    if let Some(&n) = multi_index.get(&key) {
                        n
                    } else {
                        let node = arcs.add_node();
                        extra_points.push(q.clone());
                        multi_index.insert(key, node);
                        multi.push((node, q.clone()));
                        for mask in 0..1usize << fractional.len() {
                            let mut c = base.clone();
                            for (bit, &i) in fractional.iter().enumerate() {
                                c[i] += (mask >> bit & 1) as i64;
                            }
                            if let Some(cv) = lattice.index_of(&c) {
                                if allowed[cv] {
                                    let cf: Vec<f64> = c.iter().map(|x| *x as f64).collect();
                                    arcs.connect(node, cv, b * l1(q, &cf));
                                }
                            }
                        }
                        for (slot, &i) in fractional.iter().enumerate() {
                            let others: Vec<usize> =
                                fractional.iter().enumerate().filter(|(s, _)| *s != slot).map(|(_, &j)| j).collect();
                            let Some(list) = frac[i].get(&base[i]) else { continue };
                            for mask in 0..1usize << others.len() {
                                let mut c = base.clone();
                                for (bit, &j) in others.iter().enumerate() {
                                    c[j] += (mask >> bit & 1) as i64;
                                }
                                let Some(cv) = lattice.index_of(&c) else { continue };
                                for &p in list {
                                    if let Some(&ep) = edge_points.get(&(cv, i, p.to_bits())) {
                                        let mut x: Vec<f64> = c.iter().map(|v| *v as f64).collect();
                                        x[i] = p;
                                        arcs.connect(node, ep, b * l1(q, &x));
                                    }
                                }
                            }
                        }
                        node
                    }
                }
            };
            query_nodes.push(node);
        }
        let share_cube = |x: &[f64], y: &[f64]| {
            x.iter().zip(y).all(|(a, c)| a.ceil().max(c.ceil()) - 1.0 <= a.floor().min(c.floor()))
        };
        for i in 0..multi.len() {
            for j in i + 1..multi.len() {
                if share_cube(&multi[i].1, &multi[j].1) {
                    arcs.connect(multi[i].0, multi[j].0, b * l1(&multi[i].1, &multi[j].1));
                }
            }
        }
        if window.is_some_and(|w| !w.is_box()) {
            // straight jumps keep the envelope D <= b |x - y| inside
            // non-rectangular windows
            let mut uniq: Vec<(usize, usize)> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for (qi, &u) in query_nodes.iter().enumerate() {
                if seen.insert(u) {
                    uniq.push((u, qi));
                }
            }
            for (s, &(u, qi)) in uniq.iter().enumerate() {
                for &(v, qj) in &uniq[s + 1..] {
                    arcs.connect(u, v, b * l1(&queries[qi], &queries[qj]));
                }
            }
        }
        Ok(Self { csr: arcs.finish(), lattice, extra_points, query_nodes })
    }

    pub fn query_node(&self, i: usize) -> usize {
        self.query_nodes[i]
    }

    pub fn node_point(&self, v: usize) -> Vec<f64> {
        let nv = self.lattice.vertex_count();
        if v < nv {
            self.lattice.coords(v).into_iter().map(|c| c as f64).collect()
        } else {
            self.extra_points[v - nv].clone()
        }
    }

    pub fn run(&self, sources: &[(usize, f64)], stop: Stop<'_>) -> ShortestPaths {
        dijkstra(&self.csr, sources, stop)
    }

    /// Distances from query `i` to the queries listed in `targets`, stopping
    /// once all of them are settled.
    pub fn distances_to(&self, i: usize, targets: &[usize]) -> Vec<f64> {
        let src = self.query_nodes[i];
        let mut want: HashMap<usize, usize> = HashMap::new();
        for &t in targets {
            *want.entry(self.query_nodes[t]).or_default() += 1;
        }
        let mut remaining = want.len();
        let mut on_settle = |u: usize| {
            if want.remove(&u).is_some() {
                remaining -= 1;
            }
            remaining == 0
        };
        let sp = self.run(&[(src, 0.0)], Stop::When(&mut on_settle));
        targets.iter().map(|&t| sp.dist[self.query_nodes[t]]).collect()
    }
}
