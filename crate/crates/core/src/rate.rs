//! Rate functionals built from an elementary cost of seminorms.
//!
//! The integral rate of a metric is `int_X I((grad D)_z) dz`, where `I` is
//! an [`ElementaryCost`]. No closed form of the elementary rate is known,
//! so it is pluggable: [`BoundModel`] is the upper bound
//! `-d ln nu([sup g, b])`, [`EmpiricalModel`] interpolates measured rates,
//! and [`ToyModel`] wraps a closure. Costs live in `[0, +inf]`.

use std::fmt;

use crate::error::{invalid, Result};
use crate::geometry::{box_corners, l1_norm, ConvexWindow};
use crate::lattice::BoundedLaw;
use crate::ld::RateEstimate;
use crate::metric::{
    estimate_gradient, prescribe_metric, prescribed_distances_from, Bounds, GradientField, Grid, GridMetric, LevelGraph, Seminorm,
};
use crate::{par, rng};

pub use crate::metric::symmetrize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelFlags {
    /// `g <= g'` implies `cost(g) <= cost(g')`.
    pub monotone: bool,
    pub reflection_invariant: bool,
    /// Finite at `b |.|_1`.
    pub finite_at_b: bool,
}

pub trait ElementaryCost: Sync {
    fn cost(&self, g: &Seminorm) -> f64;
    fn flags(&self) -> ModelFlags;
    fn name(&self) -> String;
}

/// `-d ln nu([sup_{|u|_1 = 1} g(u), b])`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundModel {
    law: BoundedLaw,
    dim: usize,
}

impl BoundModel {
    pub fn new(law: BoundedLaw, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        Ok(Self { law, dim })
    }
}

impl ElementaryCost for BoundModel {
    fn cost(&self, g: &Seminorm) -> f64 {
        let (a, b) = (self.law.a(), self.law.b());
        let s = g.sup_on_l1_sphere();
        if s <= a {
            return 0.0;
        }
        if s > b * (1.0 + 1e-12) {
            return f64::INFINITY;
        }
        let q = self.law.mass_at_least(s.min(b));
        if q >= 1.0 {
            0.0
        } else if q <= 0.0 {
            f64::INFINITY
        } else {
            -(self.dim as f64) * q.ln()
        }
    }

    fn flags(&self) -> ModelFlags {
        ModelFlags { monotone: true, reflection_invariant: true, finite_at_b: self.law.mass_at(self.law.b()) > 0.0 }
    }

    fn name(&self) -> String {
        format!("bound[{}]", self.law)
    }
}

/// Rates measured for scaled-l1 targets `zeta |.|_1`, made nondecreasing by
/// pool-adjacent-violators and interpolated linearly. A seminorm is
/// evaluated at the smallest scaled-l1 norm dominating it, which for a
/// monotone rate is an upper bound.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalModel {
    levels: Vec<f64>,
    values: Vec<f64>,
}

impl EmpiricalModel {
    pub fn new(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() || table.iter().any(|(z, r)| !z.is_finite() || r.is_nan() || *r < 0.0) {
            return invalid("empirical table needs finite levels and non-negative rates");
        }
        table.sort_by(|x, y| x.0.total_cmp(&y.0));
        if table.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("empirical table has repeated levels");
        }
        let levels = table.iter().map(|t| t.0).collect();
        let values = isotonic(&table.iter().map(|t| t.1).collect::<Vec<_>>());
        Ok(Self { levels, values })
    }

    /// Table from rate estimates; zero-hit lower bounds are kept as values.
    pub fn from_estimates(rows: &[(f64, RateEstimate)]) -> Result<Self> {
        Self::new(rows.iter().map(|(z, e)| (*z, e.rate)).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, z: f64) -> f64 {
        let last = self.levels.len() - 1;
        if z <= self.levels[0] {
            return self.values[0];
        }
        if z > self.levels[last] * (1.0 + 1e-12) {
            return f64::INFINITY;
        }
        let j = self.levels.partition_point(|l| *l < z).clamp(1, last);
        let (z0, z1) = (self.levels[j - 1], self.levels[j]);
        let t = ((z - z0) / (z1 - z0)).clamp(0.0, 1.0);
        if self.values[j].is_infinite() {
            return if t > 0.0 { f64::INFINITY } else { self.values[j - 1] };
        }
        (1.0 - t) * self.values[j - 1] + t * self.values[j]
    }
}

/// Least-squares nondecreasing fit with equal weights.
fn isotonic(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let merged = if m1.is_infinite() || m2.is_infinite() {
                f64::INFINITY
            } else {
                (m1 * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64
            };
            blocks.push((merged, c1 + c2));
        }
    }
    blocks.into_iter().flat_map(|(m, c)| std::iter::repeat_n(m, c)).collect()
}

impl ElementaryCost for EmpiricalModel {
    fn cost(&self, g: &Seminorm) -> f64 {
        self.at(g.sup_on_l1_sphere())
    }

    fn flags(&self) -> ModelFlags {
        let last = self.values.len() - 1;
        ModelFlags { monotone: true, reflection_invariant: true, finite_at_b: self.values[last].is_finite() }
    }

    fn name(&self) -> String {
        format!("empirical[{} levels]", self.levels.len())
    }
}

type CostFn = dyn Fn(&Seminorm) -> f64 + Send + Sync;

/// Cost given by a closure, with declared flags.
pub struct ToyModel {
    f: Box<CostFn>,
    flags: ModelFlags,
    name: String,
}

impl ToyModel {
    pub fn new(name: &str, flags: ModelFlags, f: impl Fn(&Seminorm) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f), flags, name: name.to_string() }
    }
}

impl fmt::Debug for ToyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ToyModel({})", self.name)
    }
}

impl ElementaryCost for ToyModel {
    fn cost(&self, g: &Seminorm) -> f64 {
        (self.f)(g)
    }

    fn flags(&self) -> ModelFlags {
        self.flags
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Random spot check of the monotone flag: pairs `g <= g'` built from
/// ordered weighted-sup and scaled-l1 seminorms. Returns the number of
/// pairs with `cost(g) > cost(g')`.
pub fn spot_check_monotone(model: &dyn ElementaryCost, dim: usize, bounds: Bounds, pairs: usize, seed: u64) -> usize {
    let Bounds { a, b } = bounds;
    let u = |i: usize, j: usize| rng::uniform(seed, i as u64, j as u64);
    (0..pairs)
        .filter(|&i| {
            let lo: Vec<f64> = (0..dim).map(|j| a + (b - a) * u(i, j)).collect();
            let hi: Vec<f64> = lo.iter().enumerate().map(|(j, v)| v + (b - v) * u(i, dim + j)).collect();
            let c = a + (b - a) * u(i, 2 * dim);
            let g = Seminorm::Max(vec![Seminorm::WeightedLinf(lo), Seminorm::ScaledL1(a)]);
            let h = Seminorm::Max(vec![Seminorm::WeightedLinf(hi), Seminorm::ScaledL1(c.max(a))]);
            model.cost(&g) > model.cost(&h) * (1.0 + 1e-12)
        })
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralRate {
    /// Midpoint quadrature.
    pub value: f64,
    /// Sandwich from tiles inside / meeting the window.
    pub lower: f64,
    pub upper: f64,
    /// Cells (or tiles) of positive measure where the cost is infinite.
    pub infinite_cells: Vec<usize>,
    /// Gradient estimates that ran into the boundary.
    pub boundary_warnings: usize,
}

fn weighted(cost: f64, vol: f64) -> f64 {
    if vol == 0.0 {
        0.0
    } else {
        cost * vol
    }
}

/// Integral rate of a piecewise-constant field. On boxes every cell volume
/// is exact; on polytopes each cell is split into `k^d` sub-boxes, giving a
/// midpoint value and an inner/outer sandwich.
pub fn integral_rate(field: &GradientField, model: &dyn ElementaryCost, k: usize) -> Result<IntegralRate> {
    if k == 0 {
        return invalid("tiling resolution must be positive");
    }
    let window = field.window();
    let d = window.dim();
    let costs: Vec<f64> = field.cells().iter().map(|g| model.cost(g)).collect();
    let mut out = IntegralRate { value: 0.0, lower: 0.0, upper: 0.0, infinite_cells: Vec::new(), boundary_warnings: 0 };
    for (c, &cost) in costs.iter().enumerate() {
        let (lo, hi) = field.cell_box(c);
        let (inner, mid, outer) = match window {
            ConvexWindow::Box { lower, upper } => {
                let v: f64 = (0..d).map(|i| (hi[i].min(upper[i]) - lo[i].max(lower[i])).max(0.0)).product();
                (v, v, v)
            }
            ConvexWindow::Polytope(_) => {
                let (mut inner, mut mid, mut outer) = (0.0, 0.0, 0.0);
                let kf = k as f64;
                let sub: f64 = (0..d).map(|i| (hi[i] - lo[i]) / kf).product();
                crate::util::for_each_index(&vec![0; d], &vec![k as i64 - 1; d], |j| {
                    let slo: Vec<f64> = (0..d).map(|i| lo[i] + (hi[i] - lo[i]) * j[i] as f64 / kf).collect();
                    let shi: Vec<f64> = (0..d).map(|i| lo[i] + (hi[i] - lo[i]) * (j[i] + 1) as f64 / kf).collect();
                    let centre: Vec<f64> = slo.iter().zip(&shi).map(|(a, b)| 0.5 * (a + b)).collect();
                    if box_corners(&slo, &shi).iter().all(|p| window.contains(p)) {
                        inner += sub;
                    }
                    if window.meets_box(&slo, &shi) {
                        outer += sub;
                    }
                    if window.contains(&centre) {
                        mid += sub;
                    }
                });
                (inner, mid, outer)
            }
        };
        if cost.is_infinite() && mid > 0.0 {
            out.infinite_cells.push(c);
        }
        out.value += weighted(cost, mid);
        out.lower += weighted(cost, inner);
        out.upper += weighted(cost, outer);
    }
    Ok(out)
}

/// Integral rate of a grid metric: gradients estimated at the midpoints of
/// the `1/k` tiles (steps `steps`), midpoint quadrature over tiles whose
/// centre lies in the window. Tiles meeting the boundary contribute at most
/// `cost(b |.|_1)` each to the upper bound, valid for monotone models.
pub fn integral_rate_metric(metric: &GridMetric, model: &dyn ElementaryCost, k: usize, steps: &[f64]) -> Result<IntegralRate> {
    let window = metric.window();
    let d = window.dim();
    let tiles = window.tiles(k)?;
    let vol = (k as f64).powi(-(d as i32));
    let top = model.cost(&Seminorm::ScaledL1(metric.bounds().b));
    let kf = k as f64;
    let evals = par::try_map_indexed(tiles.outer.len(), |t| -> Result<Option<(f64, bool)>> {
        let centre: Vec<f64> = tiles.outer[t].iter().map(|c| (*c as f64 + 0.5) / kf).collect();
        if !window.contains(&centre) {
            return Ok(None);
        }
        let g = estimate_gradient(metric, &centre, steps)?;
        Ok(Some((model.cost(&g.seminorm), g.boundary_warning)))
    })?;
    let mut out = IntegralRate { value: 0.0, lower: 0.0, upper: 0.0, infinite_cells: Vec::new(), boundary_warnings: 0 };
    for (t, e) in evals.iter().enumerate() {
        let is_inner = tiles.inner.binary_search(&tiles.outer[t]).is_ok();
        if let Some((cost, warn)) = e {
            out.value += cost * vol;
            out.boundary_warnings += usize::from(*warn);
            if cost.is_infinite() {
                out.infinite_cells.push(t);
            }
            if is_inner {
                out.lower += cost * vol;
                out.upper += cost * vol;
                continue;
            }
        }
        if !is_inner {
            out.upper += top * vol;
        }
    }
    Ok(out)
}

/// `g^zeta(u) = max_i zeta_i |u_i|`.
pub fn crossing_seminorm(zeta: &[f64]) -> Result<Seminorm> {
    if zeta.is_empty() || zeta.iter().any(|z| !(*z >= 0.0 && z.is_finite())) {
        return invalid("crossing vector entries must be finite and non-negative");
    }
    Ok(Seminorm::WeightedLinf(zeta.to_vec()))
}

/// `max(g^zeta, a |.|_1)`, the seminorm whose cost is the crossing rate.
pub fn crossing_field_seminorm(zeta: &[f64], bounds: Bounds) -> Result<Seminorm> {
    if zeta.iter().any(|z| !(bounds.a <= *z && *z <= bounds.b)) {
        return invalid(format!("crossing vector entries must lie in [{}, {}]", bounds.a, bounds.b));
    }
    Ok(Seminorm::Max(vec![crossing_seminorm(zeta)?, Seminorm::ScaledL1(bounds.a)]))
}

pub fn crossing_rate(zeta: &[f64], model: &dyn ElementaryCost, bounds: Bounds) -> Result<f64> {
    Ok(model.cost(&crossing_field_seminorm(zeta, bounds)?))
}

/// Two-slab witness for separate convexity in the first coordinate: the
/// field equal to `max(g^zeta, a|.|_1)` on `x_1 < theta` and to the same
/// with `zeta_1` replaced by `zeta1_alt` on `x_1 > theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSlabCertificate {
    pub integral: f64,
    /// `theta I(zeta) + (1 - theta) I(zeta')`.
    pub combination: f64,
    pub additivity_error: f64,
    /// Face-to-face distances of the prescribed metric.
    pub crossing: Vec<f64>,
    /// `theta zeta_1 + (1 - theta) zeta1_alt`, then `zeta_2, ..`.
    pub expected_crossing: Vec<f64>,
    pub crossing_error: f64,
    pub tolerance: f64,
    /// Additivity and crossing distances both within tolerance.
    pub holds: bool,
    /// Crossing rate at the averaged vector, and `combination` minus it.
    pub averaged_rate: f64,
    pub convexity_gap: f64,
}

/// Build and check the two-slab witness on `[0,1]^d` with an `m`-grid;
/// `theta m` must be an integer so the slab boundary lies on the grid.
pub fn two_slab_certificate(
    zeta: &[f64],
    zeta1_alt: f64,
    theta: f64,
    model: &dyn ElementaryCost,
    bounds: Bounds,
    m: usize,
) -> Result<TwoSlabCertificate> {
    let d = zeta.len();
    if d == 0 || !(theta > 0.0 && theta < 1.0) {
        return invalid("need a non-empty crossing vector and theta in (0, 1)");
    }
    if ((theta * m as f64).round() - theta * m as f64).abs() > 1e-9 {
        return invalid(format!("theta * m = {} must be an integer", theta * m as f64));
    }
    let mut alt = zeta.to_vec();
    alt[0] = zeta1_alt;
    let left = crossing_field_seminorm(zeta, bounds)?;
    let right = crossing_field_seminorm(&alt, bounds)?;
    let mut cuts = vec![vec![0.0, 1.0]; d];
    cuts[0] = vec![0.0, theta, 1.0];
    let field = GradientField::new(ConvexWindow::unit_cube(d), cuts, vec![left.clone(), right.clone()], bounds)?;
    let integral = integral_rate(&field, model, 1)?.value;
    let (ci, cj) = (model.cost(&left), model.cost(&right));
    let combination = weighted(ci, theta) + weighted(cj, 1.0 - theta);
    let additivity_error = if integral == combination { 0.0 } else { (integral - combination).abs() };
    let metric = prescribe_metric(&field, m)?;
    let crossing: Vec<f64> = (0..d).map(|i| metric.face_distance(i)).collect();
    let mut expected_crossing = zeta.to_vec();
    expected_crossing[0] = theta * zeta[0] + (1.0 - theta) * zeta1_alt;
    let crossing_error = crossing.iter().zip(&expected_crossing).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tolerance = 1e-9 * (1.0 + bounds.b * d as f64);
    let averaged_rate = crossing_rate(&expected_crossing, model, bounds)?;
    let convexity_gap = if combination == averaged_rate { 0.0 } else { combination - averaged_rate };
    Ok(TwoSlabCertificate {
        integral,
        combination,
        additivity_error,
        crossing,
        expected_crossing,
        crossing_error,
        tolerance,
        holds: additivity_error <= tolerance * (1.0 + combination.abs().min(1e300)) && crossing_error <= tolerance,
        averaged_rate,
        convexity_gap,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointPointOptions {
    /// Tiles per axis of the search field.
    pub tiles: usize,
    /// Grid steps along the l1 length of `x`.
    pub resolution: usize,
    pub max_sweeps: usize,
    pub bisection_steps: usize,
}

impl Default for PointPointOptions {
    fn default() -> Self {
        Self { tiles: 8, resolution: 8, max_sweeps: 4, bisection_steps: 24 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointPointResult {
    pub zeta: f64,
    pub value: f64,
    pub witness: GradientField,
    /// `D(0, x)` of the metric prescribed by the witness.
    pub achieved: f64,
    pub margin: f64,
    /// Cost of the constant field `(zeta / |x|_1) |.|_1`.
    pub trivial_bound: f64,
    pub sweeps: usize,
}

/// Search grid: origin and `x` are grid points; per-axis spacing close to
/// `|x|_1 / resolution`; extent covers `[-C, C]^d`, `C = b |x|_1 / a`.
fn point_point_grid(x: &[f64], bounds: Bounds, resolution: usize) -> Result<(ConvexWindow, Grid, usize, usize)> {
    let len = l1_norm(x);
    let h0 = len / resolution as f64;
    let spacing: Vec<f64> = x
        .iter()
        .map(|&v| if v == 0.0 { h0 } else { v.abs() / (v.abs() / h0).ceil() })
        .collect();
    let c = bounds.b * len / bounds.a;
    let reach: Vec<i64> = spacing.iter().map(|h| (c / h - 1e-9).ceil() as i64).collect();
    let lo: Vec<f64> = reach.iter().zip(&spacing).map(|(r, h)| -(*r as f64) * h).collect();
    let hi: Vec<f64> = lo.iter().map(|v| -v).collect();
    let d = x.len();
    let mut coords = Vec::new();
    crate::util::for_each_index(&reach.iter().map(|r| -r).collect::<Vec<_>>(), &reach, |c| coords.push(c.to_vec()));
    let grid = Grid::from_coords(vec![0.0; d], spacing.clone(), coords)?;
    let src = grid.index_of(&vec![0; d]).expect("origin on grid");
    let target: Vec<i64> = x.iter().zip(&spacing).map(|(v, h)| (v / h).round() as i64).collect();
    let dst = grid.index_of(&target).expect("x on grid");
    Ok((ConvexWindow::new_box(lo, hi)?, grid, src, dst))
}

/// Upper bound on `min { I(D) : D(0, x) >= zeta }` over fields with one
/// scaled-l1 level per tile, by coordinate descent from the constant
/// feasible field: each tile is dropped to `a` when that stays feasible and
/// otherwise bisected down to its lowest feasible level.
pub fn point_point_rate(
    x: &[f64],
    zeta: f64,
    model: &dyn ElementaryCost,
    bounds: Bounds,
    opts: &PointPointOptions,
) -> Result<PointPointResult> {
    let Bounds { a, b } = bounds;
    if !(a > 0.0) {
        return invalid("the point-point window needs a > 0");
    }
    let len = l1_norm(x);
    if x.is_empty() || len == 0.0 {
        return invalid("x must be a non-zero point");
    }
    if zeta > b * len * (1.0 + 1e-12) {
        return invalid(format!("zeta = {zeta} exceeds b |x|_1 = {}", b * len));
    }
    if opts.tiles == 0 || opts.resolution == 0 {
        return invalid("tiles and resolution must be positive");
    }
    let (window, grid, src, dst) = point_point_grid(x, bounds, opts.resolution)?;
    let start = (zeta / len).clamp(a, b);
    let field = GradientField::uniform(window, opts.tiles, bounds, |_| Seminorm::ScaledL1(start))?;
    let ntiles = field.cell_count();
    let vols: Vec<f64> = (0..ntiles)
        .map(|c| {
            let (lo, hi) = field.cell_box(c);
            lo.iter().zip(&hi).map(|(l, h)| h - l).product()
        })
        .collect();
    let cost_of = |lvl: f64| model.cost(&Seminorm::ScaledL1(lvl));
    let total = |levels: &[f64]| levels.iter().zip(&vols).map(|(l, v)| weighted(cost_of(*l), *v)).sum::<f64>();
    let tol = 1e-9 * (1.0 + zeta.abs());
    let mut graph = LevelGraph::new(&field, &grid);
    let mut levels = vec![start; ntiles];
    let trivial_bound = total(&levels);
    let mut feasible = |levels: &[f64]| {
        graph.set_levels(levels);
        graph.distance(src, dst) >= zeta - tol
    };
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for t in 0..ntiles {
            let cur = levels[t];
            if cur <= a {
                continue;
            }
            levels[t] = a;
            if feasible(&levels) {
                improved = true;
                continue;
            }
            let (mut lo, mut hi) = (a, cur);
            for _ in 0..opts.bisection_steps {
                let mid = 0.5 * (lo + hi);
                levels[t] = mid;
                if feasible(&levels) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            levels[t] = hi;
            improved |= hi < cur && cost_of(hi) <= cost_of(cur);
        }
        if !improved {
            break;
        }
    }
    let witness = field.with_cells(levels.iter().map(|l| Seminorm::ScaledL1(*l)).collect())?;
    let achieved = prescribed_distances_from(&witness, &grid, src)[dst];
    let value = integral_rate(&witness, model, 1)?.value.min(trivial_bound);
    Ok(PointPointResult { zeta, value, witness, achieved, margin: achieved - zeta, trivial_bound, sweeps })
}

/// [`point_point_rate`] along increasing `zetas`. A witness feasible for a
/// larger `zeta` is feasible for every smaller one, so values are replaced
/// by the best later witness, making the curve nondecreasing.
pub fn point_point_curve(
    x: &[f64],
    zetas: &[f64],
    model: &dyn ElementaryCost,
    bounds: Bounds,
    opts: &PointPointOptions,
) -> Result<Vec<PointPointResult>> {
    if zetas.windows(2).any(|w| !(w[0] <= w[1])) {
        return invalid("zeta values must be nondecreasing");
    }
    let mut out = par::try_map_indexed(zetas.len(), |i| point_point_rate(x, zetas[i], model, bounds, opts))?;
    for i in (0..out.len().saturating_sub(1)).rev() {
        if out[i + 1].value < out[i].value {
            let zeta = out[i].zeta;
            let mut better = out[i + 1].clone();
            better.zeta = zeta;
            better.margin = better.achieved - zeta;
            out[i] = better;
        }
    }
    Ok(out)
}
