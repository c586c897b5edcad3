//! Passage times on the lattice and between real points.
//!
//! Lattice distances run Dijkstra on the nearest-neighbour graph. Distances
//! between real points use the generalised passage time, in which a path may
//! ride along edges at cost `tau_e` per unit length and jump through space
//! at cost `b` per unit of l1 length; it is computed exactly on the finite
//! graph built in `augmented`.

mod augmented;
pub(crate) mod graph;

use crate::error::{invalid, Result};
use crate::geometry::{l1, ConvexWindow};
use crate::lattice::{EdgeId, LatticeBox, WeightConfiguration};
use crate::metric::{Bounds, Grid, GridMetric};
use crate::par;
use augmented::AugmentedGraph;
use graph::{dijkstra, LatticeGraph, Stop};

/// Lattice path with its passage time.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePath {
    pub vertices: Vec<Vec<i64>>,
    pub edges: Vec<EdgeId>,
    pub time: f64,
}

/// Polygonal path through real points; `times[k]` is the passage time from
/// the start to `points[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
}

impl GeodesicPath {
    pub fn time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn l1_length(&self) -> f64 {
        self.points.windows(2).map(|w| l1(&w[0], &w[1])).sum()
    }
}

/// Mesh points of the rescaled ball `{ x : T(0, n x) <= n }`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSet {
    pub n: usize,
    pub mesh: f64,
    pub points: Vec<Vec<f64>>,
}

fn vertex(config: &WeightConfiguration, x: &[i64]) -> Result<usize> {
    config
        .lattice()
        .index_of(x)
        .ok_or_else(|| crate::FppError::InvalidInput(format!("vertex {x:?} lies outside the configuration box")))
}

pub fn discrete_passage_time(config: &WeightConfiguration, x: &[i64], y: &[i64]) -> Result<f64> {
    let (s, t) = (vertex(config, x)?, vertex(config, y)?);
    let g = LatticeGraph { config, mask: None };
    Ok(dijkstra(&g, &[(s, 0.0)], Stop::At(t)).dist[t])
}

/// Geodesic with ties broken by canonical edge order.
pub fn discrete_geodesic(config: &WeightConfiguration, x: &[i64], y: &[i64]) -> Result<LatticePath> {
    let (s, t) = (vertex(config, x)?, vertex(config, y)?);
    let g = LatticeGraph { config, mask: None };
    let sp = dijkstra(&g, &[(s, 0.0)], Stop::At(t));
    let nodes = sp.path_to(t);
    let lat = config.lattice();
    let edges = nodes.windows(2).map(|w| lat.edge_between(w[0], w[1]).expect("adjacent vertices")).collect();
    Ok(LatticePath { vertices: nodes.iter().map(|&v| lat.coords(v)).collect(), edges, time: sp.dist[t] })
}

/// Generalised passage time between real points of the configuration box.
pub fn continuous_passage_time(config: &WeightConfiguration, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(box_geodesic_impl(config, None, x, y)?.time())
}

pub fn continuous_geodesic(config: &WeightConfiguration, x: &[f64], y: &[f64]) -> Result<GeodesicPath> {
    box_geodesic_impl(config, None, x, y)
}

/// Passage time using only paths inside the convex `window`.
pub fn box_passage_time(config: &WeightConfiguration, window: &ConvexWindow, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(box_geodesic_impl(config, Some(window), x, y)?.time())
}

pub fn box_geodesic(config: &WeightConfiguration, window: &ConvexWindow, x: &[f64], y: &[f64]) -> Result<GeodesicPath> {
    box_geodesic_impl(config, Some(window), x, y)
}

fn box_geodesic_impl(
    config: &WeightConfiguration,
    window: Option<&ConvexWindow>,
    x: &[f64],
    y: &[f64],
) -> Result<GeodesicPath> {
    let g = AugmentedGraph::build(config, window, &[x.to_vec(), y.to_vec()])?;
    let (s, t) = (g.query_node(0), g.query_node(1));
    let sp = g.run(&[(s, 0.0)], Stop::At(t));
    if !sp.dist[t].is_finite() {
        return Err(crate::FppError::InvariantViolation("target unreachable inside the window".into()));
    }
    let nodes = sp.path_to(t);
    Ok(GeodesicPath { points: nodes.iter().map(|&v| g.node_point(v)).collect(), times: nodes.iter().map(|&v| sp.dist[v]).collect() })
}

/// Symmetric matrix of generalised passage times between `points`
/// (row-major, `points.len()^2` entries). Entry `(i, j)` with `i < j` is
/// computed from `i` and mirrored, so the result is exactly symmetric.
pub fn passage_matrix(config: &WeightConfiguration, window: Option<&ConvexWindow>, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let g = AugmentedGraph::build(config, window, points)?;
    let n = points.len();
    let rows = par::map_indexed(n, |i| {
        let targets: Vec<usize> = (i + 1..n).collect();
        g.distances_to(i, &targets)
    });
    let mut out = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(crate::FppError::InvariantViolation("some grid points are unreachable inside the window".into()));
    }
    Ok(out)
}

/// `D_n(x, y) = T_{nX}(n x, n y) / n` on the `k`-grid of `window`.
pub fn rescaled_metric(config: &WeightConfiguration, window: &ConvexWindow, n: usize, k: usize) -> Result<GridMetric> {
    if n == 0 || k == 0 {
        return invalid("scale n and resolution k must be positive");
    }
    let grid = Grid::for_window(window, k)?;
    let nf = n as f64;
    let scaled: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i).iter().map(|v| v * nf).collect()).collect();
    let scaled_window = window.scale(nf);
    let (lo, hi) = scaled_window.bounding_box();
    let lat = config.lattice();
    if !lat.contains_point(&lo) || !lat.contains_point(&hi) {
        return invalid(format!("configuration box does not cover the rescaled window n X with n = {n}"));
    }
    let mut values = passage_matrix(config, Some(&scaled_window), &scaled)?;
    values.iter_mut().for_each(|v| *v /= nf);
    let law = config.law();
    GridMetric::assemble(window.clone(), grid, values, Bounds::new(law.a(), law.b())?)
}

/// Rescaled crossing times of `[0, n]^d`, one per axis: the smallest
/// passage time inside the cube from the face `x_i = 0` to the face
/// `x_i = n`, divided by `n`.
pub fn crossing_times(config: &WeightConfiguration, n: usize) -> Result<Vec<f64>> {
    let lat = config.lattice();
    let d = lat.dim();
    let cube = LatticeBox::cube(d, n as i64)?;
    if n == 0 || !lat.contains_box(&cube) {
        return invalid(format!("configuration box does not contain [0, {n}]^{d}"));
    }
    let nv = lat.vertex_count();
    let mut coords = vec![0i64; d];
    let mask: Vec<bool> = (0..nv)
        .map(|v| {
            lat.coords_into(v, &mut coords);
            cube.contains(&coords)
        })
        .collect();
    let g = LatticeGraph { config, mask: Some(&mask) };
    let out = par::map_indexed(d, |axis| {
        let sources: Vec<(usize, f64)> =
            (0..nv).filter(|&v| mask[v] && lat.coord(v, axis) == 0).map(|v| (v, 0.0)).collect();
        let mut hit = None;
        let mut stop = |u: usize| {
            if lat.coord(u, axis) == n as i64 {
                hit = Some(u);
                true
            } else {
                false
            }
        };
        let sp = dijkstra(&g, &sources, Stop::When(&mut stop));
        hit.map_or(f64::INFINITY, |u| sp.dist[u]) / n as f64
    });
    Ok(out)
}

/// Points of the `mesh`-grid lying in `{ x : T(0, n x) <= n }`. The law must
/// have `a > 0`, and the box must contain `[-n/a, n/a]^d`.
pub fn growing_ball(config: &WeightConfiguration, n: usize, mesh: f64) -> Result<BallSet> {
    let a = config.law().a();
    if !(a > 0.0) {
        return invalid("the growing ball is only bounded when a > 0");
    }
    if n == 0 || !(mesh > 0.0) {
        return invalid("n and mesh must be positive");
    }
    let d = config.dim();
    let radius = 1.0 / a;
    let reach = (n as f64 * radius).ceil() as i64;
    let needed = LatticeBox::new(vec![-reach; d], vec![reach; d])?;
    if !config.lattice().contains_box(&needed) {
        return invalid(format!("configuration box must contain [-{reach}, {reach}]^{d}"));
    }
    let steps = (radius / mesh).floor() as i64;
    let mut mesh_points: Vec<Vec<f64>> = Vec::new();
    crate::util::for_each_index(&vec![-steps; d], &vec![steps; d], |idx| {
        let x: Vec<f64> = idx.iter().map(|&c| c as f64 * mesh).collect();
        if x.iter().map(|v| v.abs()).sum::<f64>() <= radius * (1.0 + 1e-12) {
            mesh_points.push(x);
        }
    });
    let nf = n as f64;
    let mut queries: Vec<Vec<f64>> = vec![vec![0.0; d]];
    queries.extend(mesh_points.iter().map(|x| x.iter().map(|v| v * nf).collect::<Vec<f64>>()));
    let g = AugmentedGraph::build(config, None, &queries)?;
    let sp = g.run(&[(g.query_node(0), 0.0)], Stop::Never);
    let points = mesh_points
        .into_iter()
        .enumerate()
        .filter(|(i, _)| sp.dist[g.query_node(i + 1)] <= nf * (1.0 + 1e-12))
        .map(|(_, x)| x)
        .collect();
    Ok(BallSet { n, mesh, points })
}
