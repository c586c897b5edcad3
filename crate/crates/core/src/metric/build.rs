//! Metrics built by shortest paths on grid graphs: prescription from a
//! gradient field, restriction to a sub-window, stitching and
//! symmetrisation.

use super::grid::{Bounds, Grid, GridMetric};
use super::seminorm::{primitive_offsets, GradientField, SampledSeminorm, Seminorm};
use crate::error::{invalid, FppError, Result};
use crate::geometry::{l1, ConvexWindow};
use crate::par;
use crate::passage::graph::{dijkstra, ArcLists, Csr, Stop};

/// Stencil offsets with positive leading entry: primitive vectors of sup
/// norm at most 2.
fn half_stencil(d: usize) -> Vec<Vec<i64>> {
    primitive_offsets(d, 2).into_iter().filter(|o| o.iter().find(|v| **v != 0).is_some_and(|v| *v > 0)).collect()
}

fn shifted(c: &[i64], o: &[i64]) -> Vec<i64> {
    c.iter().zip(o).map(|(a, b)| a + b).collect()
}

/// All-pairs distances; `(i, j)` with `i < j` computed from `i` and mirrored.
pub(crate) fn all_pairs(csr: &Csr, n: usize) -> Result<Vec<f64>> {
    let rows = par::map_indexed(n, |i| {
        let sp = dijkstra(csr, &[(i, 0.0)], Stop::Never);
        sp.dist[i + 1..n].to_vec()
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
        return Err(FppError::InvariantViolation("grid graph is disconnected".into()));
    }
    Ok(out)
}

fn connect_all_direct(arcs: &mut ArcLists, pts: &[Vec<f64>], b: f64) {
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            arcs.connect(i, j, b * l1(&pts[i], &pts[j]));
        }
    }
}

/// Metric whose gradient is the field: shortest paths on the `m`-grid with
/// stencil arcs (primitive offsets of sup norm <= 2) costed by the exact
/// line integral of the field.
pub fn prescribe_metric(field: &GradientField, m: usize) -> Result<GridMetric> {
    let window = field.window();
    let grid = Grid::for_window(window, m)?;
    let pts = grid.points();
    let mut arcs = stencil_arcs(field, &grid);
    if !window.is_box() {
        connect_all_direct(&mut arcs, &pts, field.bounds().b);
    }
    let values = all_pairs(&arcs.finish(), grid.len())?;
    GridMetric::assemble(window.clone(), grid, values, field.bounds())
}

fn stencil_arcs(field: &GradientField, grid: &Grid) -> ArcLists {
    let pts = grid.points();
    let mut arcs = ArcLists::new(grid.len());
    for i in 0..grid.len() {
        for o in &half_stencil(grid.dim()) {
            if let Some(j) = grid.index_of(&shifted(grid.coords(i), o)) {
                arcs.connect(i, j, field.segment_cost(&pts[i], &pts[j]));
            }
        }
    }
    arcs
}

/// Single-source distances of the prescribed metric from grid point `src`
/// (stencil arcs only, which suffices on boxes).
pub(crate) fn prescribed_distances_from(field: &GradientField, grid: &Grid, src: usize) -> Vec<f64> {
    dijkstra(&stencil_arcs(field, grid).finish(), &[(src, 0.0)], Stop::Never).dist
}

/// Stencil graph of a grid under a field of scaled-l1 cells, with arc costs
/// recomputed cheaply when the per-cell levels change. Each arc keeps its
/// pieces as `(cells, l1 length)`; a piece costs the smallest level among
/// its cells times its length.
pub(crate) struct LevelGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    arc_of: Vec<usize>,
    pieces: Vec<Vec<(Vec<usize>, f64)>>,
    costs: Vec<f64>,
}

impl LevelGraph {
    pub fn new(field: &GradientField, grid: &Grid) -> Self {
        let pts = grid.points();
        let n = grid.len();
        let mut lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut pieces = Vec::new();
        for i in 0..n {
            for o in &half_stencil(grid.dim()) {
                if let Some(j) = grid.index_of(&shifted(grid.coords(i), o)) {
                    let id = pieces.len();
                    pieces.push(
                        field
                            .segment_pieces(&pts[i], &pts[j])
                            .into_iter()
                            .map(|(cells, piece)| (cells, piece.iter().map(|v| v.abs()).sum::<f64>()))
                            .collect(),
                    );
                    lists[i].push((j, id));
                    lists[j].push((i, id));
                }
            }
        }
        let mut offsets = vec![0];
        let (mut targets, mut arc_of) = (Vec::new(), Vec::new());
        for l in lists {
            for (t, id) in l {
                targets.push(t);
                arc_of.push(id);
            }
            offsets.push(targets.len());
        }
        let costs = vec![0.0; pieces.len()];
        Self { offsets, targets, arc_of, pieces, costs }
    }

    pub fn set_levels(&mut self, levels: &[f64]) {
        for (c, ps) in self.costs.iter_mut().zip(&self.pieces) {
            *c = ps.iter().map(|(cells, len)| len * cells.iter().map(|&k| levels[k]).fold(f64::INFINITY, f64::min)).sum();
        }
    }

    pub fn distance(&self, src: usize, dst: usize) -> f64 {
        dijkstra(self, &[(src, 0.0)], Stop::At(dst)).dist[dst]
    }
}

impl crate::passage::graph::Graph for LevelGraph {
    fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    fn for_each_arc(&self, u: usize, f: &mut dyn FnMut(usize, f64)) {
        for k in self.offsets[u]..self.offsets[u + 1] {
            f(self.targets[k], self.costs[self.arc_of[k]]);
        }
    }
}

/// Restriction of `metric` to the convex sub-window `y`, on the grid points
/// of `metric` lying in `y`.
///
/// Arcs join axis neighbours (cost `D(p, q)`) and stencil pairs whose
/// localisation ball, the l1 ball around the midpoint of radius
/// `((b/a) |p-q| + |p-q|) / 2` that contains every `D`-geodesic from `p` to
/// `q`, lies in `y`. Non-rectangular windows also get straight jumps of
/// cost `b |p - q|`.
pub fn restrict_metric(metric: &GridMetric, y: &ConvexWindow) -> Result<GridMetric> {
    if y.dim() != metric.grid().dim() {
        return invalid("sub-window dimension differs");
    }
    if !y.vertices().iter().all(|v| metric.window().contains(v)) {
        return invalid("restriction window must lie inside the metric's window");
    }
    let src = metric.grid();
    let members: Vec<usize> = (0..src.len()).filter(|&i| y.contains(&src.point(i))).collect();
    if members.is_empty() {
        return invalid("restriction window contains no grid point");
    }
    let grid = Grid::from_coords(
        src.origin().to_vec(),
        src.spacing().to_vec(),
        members.iter().map(|&i| src.coords(i).to_vec()).collect(),
    )?;
    let pts = grid.points();
    let d = grid.dim();
    let Bounds { a, b } = metric.bounds();
    let mut arcs = ArcLists::new(grid.len());
    for (li, &gi) in members.iter().enumerate() {
        for o in &half_stencil(d) {
            let Some(lj) = grid.index_of(&shifted(grid.coords(li), o)) else { continue };
            let axis = o.iter().filter(|v| **v != 0).count() == 1;
            let keep = axis || {
                a > 0.0 && {
                    let len = l1(&pts[li], &pts[lj]);
                    let rho = 0.5 * ((b / a) * len + len);
                    let mid: Vec<f64> = pts[li].iter().zip(&pts[lj]).map(|(p, q)| 0.5 * (p + q)).collect();
                    (0..d).all(|i| {
                        [-rho, rho].iter().all(|s| {
                            let mut v = mid.clone();
                            v[i] += s;
                            y.contains(&v)
                        })
                    })
                }
            };
            if keep {
                arcs.connect(li, lj, metric.get(gi, members[lj]));
            }
        }
    }
    if !y.is_box() {
        connect_all_direct(&mut arcs, &pts, b);
    }
    let values = all_pairs(&arcs.finish(), grid.len())?;
    GridMetric::assemble(y.clone(), grid, values, metric.bounds())
}

/// Glue metrics defined on sub-windows of `ambient` into one metric on its
/// `m`-grid: each piece contributes a complete graph on the ambient grid
/// points it contains (cost `D_v(p, q)`), and axis neighbours are joined at
/// cost `b |p - q|`. The result is the largest metric below `b |.|_1` that
/// is below every piece on its window. With no pieces it is `b |.|_1`.
pub fn stitch_metrics(ambient: &ConvexWindow, m: usize, pieces: &[&GridMetric], bounds: Bounds) -> Result<GridMetric> {
    let grid = Grid::for_window(ambient, m)?;
    let pts = grid.points();
    let d = grid.dim();
    for (k, p) in pieces.iter().enumerate() {
        if p.grid().dim() != d {
            return invalid(format!("piece {k} has the wrong dimension"));
        }
        if !p.window().vertices().iter().all(|v| ambient.contains(v)) {
            return invalid(format!("piece {k} is not inside the ambient window"));
        }
        if p.bounds().a < bounds.a - 1e-12 || p.bounds().b > bounds.b + 1e-12 {
            return invalid(format!("piece {k} has an envelope outside the stitched bounds"));
        }
    }
    let mut arcs = ArcLists::new(grid.len());
    for i in 0..grid.len() {
        for axis in 0..d {
            let mut c = grid.coords(i).to_vec();
            c[axis] += 1;
            if let Some(j) = grid.index_of(&c) {
                arcs.connect(i, j, bounds.b * l1(&pts[i], &pts[j]));
            }
        }
    }
    for piece in pieces {
        let members: Vec<(usize, Vec<f64>)> =
            (0..grid.len()).filter(|&i| piece.window().contains(&pts[i])).map(|i| (i, pts[i].clone())).collect();
        let located: Vec<Option<usize>> = members.iter().map(|(_, p)| piece.grid().locate(p)).collect();
        let costs = par::map_indexed(members.len(), |s| {
            (s + 1..members.len())
                .map(|t| match (located[s], located[t]) {
                    (Some(i), Some(j)) => piece.get(i, j),
                    _ => piece.extend(&members[s].1, &members[t].1),
                })
                .collect::<Vec<f64>>()
        });
        for (s, row) in costs.into_iter().enumerate() {
            for (off, c) in row.into_iter().enumerate() {
                arcs.connect(members[s].0, members[s + 1 + off].0, c);
            }
        }
    }
    if !ambient.is_box() {
        connect_all_direct(&mut arcs, &pts, bounds.b);
    }
    let values = all_pairs(&arcs.finish(), grid.len())?;
    GridMetric::assemble(ambient.clone(), grid, values, bounds)
}

/// Symmetrisation on `[0,1]^d`: the `2^d` half-size copies
/// `D_A(x, y) = D(2 h_A(x), 2 h_A(y)) / 2`, where `h_A` reflects the
/// coordinates in `A` about `1/2`, stitched together. Needs an even grid
/// resolution.
pub fn symmetrize(metric: &GridMetric) -> Result<GridMetric> {
    let d = metric.grid().dim();
    if *metric.window() != ConvexWindow::unit_cube(d) {
        return invalid("symmetrisation is defined on the unit cube");
    }
    let grid = metric.grid();
    let k = grid.coords(grid.len() - 1)[0];
    let spacing_ok = grid.spacing().iter().all(|s| (*s * k as f64 - 1.0).abs() < 1e-12);
    if k % 2 != 0 || grid.len() != ((k + 1) as usize).pow(d as u32) || !spacing_ok {
        return invalid("symmetrisation needs the full k-grid of the unit cube with k even");
    }
    let half = k / 2;
    let mut pieces = Vec::with_capacity(1 << d);
    for mask in 0..1usize << d {
        let lo: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 0.5 } else { 0.0 }).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + 0.5).collect();
        let window = ConvexWindow::new_box(lo, hi)?;
        let mut coords = Vec::new();
        crate::util::for_each_index(&vec![0; d], &vec![half; d], |c| {
            coords.push((0..d).map(|i| if mask >> i & 1 == 1 { c[i] + half } else { c[i] }).collect::<Vec<i64>>());
        });
        let source: Vec<usize> = coords
            .iter()
            .map(|c| {
                let img: Vec<i64> = (0..d).map(|i| if mask >> i & 1 == 1 { 2 * (k - c[i]) } else { 2 * c[i] }).collect();
                grid.index_of(&img).expect("reflected grid point")
            })
            .collect();
        let n = coords.len();
        let mut values = vec![0.0; n * n];
        for s in 0..n {
            for t in 0..n {
                values[s * n + t] = 0.5 * metric.get(source[s], source[t]);
            }
        }
        let sub = Grid::from_coords(grid.origin().to_vec(), grid.spacing().to_vec(), coords)?;
        pieces.push(GridMetric::assemble(window, sub, values, metric.bounds())?);
    }
    let refs: Vec<&GridMetric> = pieces.iter().collect();
    stitch_metrics(metric.window(), k as usize, &refs, metric.bounds())
}

/// Gradient estimate at `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    pub seminorm: Seminorm,
    /// `z` is too close to the boundary for the largest step in some
    /// direction.
    pub boundary_warning: bool,
}

/// `g(u) ~ min_h D(z, z + h u) / h` over unit l1 directions `u`.
pub fn estimate_gradient(metric: &GridMetric, z: &[f64], steps: &[f64]) -> Result<GradientEstimate> {
    let d = metric.grid().dim();
    if z.len() != d || !metric.window().contains(z) {
        return invalid("gradient point must lie in the window");
    }
    if steps.is_empty() || steps.iter().any(|h| !(*h > 0.0)) {
        return invalid("gradient steps must be positive");
    }
    let dirs = super::seminorm::l1_sphere_directions(d);
    let mut warning = false;
    let values = par::map_indexed(dirs.len(), |k| {
        let u = &dirs[k];
        let mut best = f64::INFINITY;
        let mut skipped = false;
        for &h in steps {
            let w: Vec<f64> = z.iter().zip(u).map(|(a, b)| a + h * b).collect();
            if metric.window().contains(&w) {
                best = best.min(metric.eval(z, &w) / h);
            } else {
                skipped = true;
            }
        }
        (best, skipped)
    });
    let vals: Vec<f64> = values
        .iter()
        .map(|(v, skipped)| {
            warning |= *skipped;
            if v.is_finite() {
                *v
            } else {
                metric.bounds().b
            }
        })
        .collect();
    Ok(GradientEstimate { seminorm: Seminorm::Sampled(SampledSeminorm::new(d, vals)?), boundary_warning: warning })
}
