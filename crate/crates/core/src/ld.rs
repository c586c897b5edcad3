//! Large-deviation events and their probabilities.
//!
//! An event is a yes/no question about a weight configuration. The main one
//! is [`LdEvent`]: the rescaled passage-time metric `D_n` of a window stays
//! close to (two-sided) or above (lower) a target metric, compared on the
//! points of a grid. Probabilities come from exact enumeration over
//! discrete laws or from Monte Carlo, optionally under an exponential tilt
//! with likelihood-ratio weights. Rates are `-ln P / n^d`.
//!
//! Every trial is keyed by `(seed, trial index)` and sums are taken in trial
//! order, so results do not depend on the execution mode.

use crate::error::{invalid, FppError, Result};
use crate::geometry::{l1_norm, ConvexWindow};
use crate::lattice::{sample_configuration, sample_configuration_with, BoundedLaw, EdgeSampler, LatticeBox, WeightConfiguration};
use crate::metric::{certify_corridor, Bounds, CorridorSetup, Grid, GridMetric, Seminorm};
use crate::passage::{continuous_passage_time, crossing_times, passage_matrix};
use crate::{par, rng, stats};

/// Relative floating-point slack used when comparing passage times with
/// targets.
pub const EVENT_FP_TOL: f64 = 1e-9;

/// Enumeration budget: `#edges * log2(#atoms)` may not exceed this.
pub const EXACT_BUDGET_BITS: f64 = 24.0;

const ENUM_CHUNK: u64 = 1 << 12;
const TAG_TILE: u64 = 0x7411;
const TAG_CORRIDOR: u64 = 0xC022;
const TAG_PREMISE: u64 = 0x9E11;
const TAG_RATE_M: u64 = 0x4A7E;

/// Something that can be decided from a configuration on a fixed box.
pub trait Event: Sync {
    /// Box whose edges the event depends on.
    fn lattice(&self) -> &LatticeBox;
    /// Scale `n` used to turn probabilities into rates.
    fn scale(&self) -> usize;
    fn holds(&self, config: &WeightConfiguration) -> Result<bool>;
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Metric(GridMetric),
    Norm(Seminorm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deviation {
    /// `|D_n - D| <= eps` at every grid pair.
    TwoSided,
    /// `D_n >= D - eps` at every grid pair.
    Lower,
}

/// Extra tolerance added to `eps` to account for comparing on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slack {
    None,
    /// `2 b / k`.
    Interpolation,
}

/// Large-deviation event for the rescaled metric of `window` at scale `n`,
/// compared with the target on the `k`-grid of the window.
#[derive(Clone, Debug)]
pub struct LdEvent {
    window: ConvexWindow,
    n: usize,
    k: usize,
    eps: f64,
    deviation: Deviation,
    slack: Slack,
    lattice: LatticeBox,
    scaled_window: ConvexWindow,
    scaled_points: Vec<Vec<f64>>,
    target_values: Vec<f64>,
}

impl LdEvent {
    pub fn new(window: &ConvexWindow, n: usize, k: usize, target: Target, eps: f64, deviation: Deviation) -> Result<Self> {
        if n == 0 || k == 0 {
            return invalid("scale n and grid resolution k must be positive");
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return invalid(format!("tolerance eps must be positive, got {eps}"));
        }
        let grid = Grid::for_window(window, k)?;
        let pts = grid.points();
        let target_values = match target {
            Target::Metric(m) => {
                if !m.grid().matches(&grid) {
                    return invalid("target metric must live on the k-grid of the window");
                }
                m.values().to_vec()
            }
            Target::Norm(g) => {
                if g.dim_hint().is_some_and(|h| h != window.dim()) {
                    return invalid("target norm dimension differs from the window");
                }
                let np = pts.len();
                let mut v = vec![0.0; np * np];
                for i in 0..np {
                    for j in 0..np {
                        let diff: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
                        v[i * np + j] = g.eval(&diff);
                    }
                }
                v
            }
        };
        let nf = n as f64;
        let scaled_window = window.scale(nf);
        let (lo, hi) = scaled_window.bounding_box();
        let lattice = LatticeBox::covering(&lo, &hi)?;
        let scaled_points = pts.iter().map(|p| p.iter().map(|v| v * nf).collect()).collect();
        Ok(Self {
            window: window.clone(),
            n,
            k,
            eps,
            deviation,
            slack: Slack::Interpolation,
            lattice,
            scaled_window,
            scaled_points,
            target_values,
        })
    }

    pub fn with_slack(mut self, slack: Slack) -> Self {
        self.slack = slack;
        self
    }

    pub fn window(&self) -> &ConvexWindow {
        &self.window
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn deviation(&self) -> Deviation {
        self.deviation
    }

    pub fn slack(&self) -> Slack {
        self.slack
    }

    /// `eps` plus the grid slack for a law with upper bound `b`.
    pub fn effective_eps(&self, b: f64) -> f64 {
        match self.slack {
            Slack::None => self.eps,
            Slack::Interpolation => self.eps + 2.0 * b / self.k as f64,
        }
    }

    /// Rescaled metric values `D_n` on the event grid (row-major).
    pub fn rescaled_values(&self, config: &WeightConfiguration) -> Result<Vec<f64>> {
        if !config.lattice().contains_box(&self.lattice) {
            return invalid("configuration box does not cover the rescaled window");
        }
        let mut v = passage_matrix(config, Some(&self.scaled_window), &self.scaled_points)?;
        let nf = self.n as f64;
        v.iter_mut().for_each(|x| *x /= nf);
        Ok(v)
    }

    /// Largest violation: `max (D - D_n)` for lower events, `max |D_n - D|`
    /// for two-sided ones.
    pub fn deviation_of(&self, config: &WeightConfiguration) -> Result<f64> {
        let v = self.rescaled_values(config)?;
        Ok(self.worst(&v))
    }

    fn worst(&self, v: &[f64]) -> f64 {
        let it = v.iter().zip(&self.target_values);
        match self.deviation {
            Deviation::Lower => it.map(|(d, t)| t - d).fold(0.0, f64::max),
            Deviation::TwoSided => it.map(|(d, t)| (d - t).abs()).fold(0.0, f64::max),
        }
    }

    fn fp_tol(&self, b: f64) -> f64 {
        EVENT_FP_TOL * (1.0 + b * self.window.diameter_l1())
    }
}

impl Event for LdEvent {
    fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    fn scale(&self) -> usize {
        self.n
    }

    fn holds(&self, config: &WeightConfiguration) -> Result<bool> {
        let b = config.law().b();
        let v = self.rescaled_values(config)?;
        Ok(self.worst(&v) <= self.effective_eps(b) + self.fp_tol(b))
    }
}

/// `T_cross,i >= lower[i]` for every axis, with the crossing times of
/// `[0, n]^d` rescaled by `n`. Use `-inf` to leave an axis free.
#[derive(Clone, Debug)]
pub struct CrossingEvent {
    n: usize,
    lower: Vec<f64>,
    lattice: LatticeBox,
}

impl CrossingEvent {
    pub fn new(n: usize, lower: Vec<f64>) -> Result<Self> {
        if n == 0 || lower.is_empty() {
            return invalid("crossing event needs n > 0 and one threshold per axis");
        }
        let lattice = LatticeBox::cube(lower.len(), n as i64)?;
        Ok(Self { n, lower, lattice })
    }
}

impl Event for CrossingEvent {
    fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    fn scale(&self) -> usize {
        self.n
    }

    fn holds(&self, config: &WeightConfiguration) -> Result<bool> {
        let t = crossing_times(config, self.n)?;
        let tol = EVENT_FP_TOL * (1.0 + config.law().b() * self.lower.len() as f64);
        Ok(t.iter().zip(&self.lower).all(|(v, l)| *v >= l - tol))
    }
}

/// `T(0, n x) / n >= zeta`, the unrestricted passage time, computed on the
/// box that contains every geodesic when weights are at least `a > 0`.
#[derive(Clone, Debug)]
pub struct PointPointEvent {
    n: usize,
    x: Vec<f64>,
    zeta: f64,
    lattice: LatticeBox,
}

impl PointPointEvent {
    pub fn new(x: &[f64], n: usize, zeta: f64, bounds: Bounds) -> Result<Self> {
        if n == 0 {
            return invalid("scale n must be positive");
        }
        let nx: Vec<f64> = x.iter().map(|v| v * n as f64).collect();
        let lattice = geodesic_box(&nx, bounds.a, bounds.b)?;
        Ok(Self { n, x: x.to_vec(), zeta, lattice })
    }
}

impl Event for PointPointEvent {
    fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    fn scale(&self) -> usize {
        self.n
    }

    fn holds(&self, config: &WeightConfiguration) -> Result<bool> {
        let nf = self.n as f64;
        let nx: Vec<f64> = self.x.iter().map(|v| v * nf).collect();
        let t = continuous_passage_time(config, &vec![0.0; nx.len()], &nx)? / nf;
        Ok(t >= self.zeta - EVENT_FP_TOL * (1.0 + config.law().b() * l1_norm(&self.x)))
    }
}

/// Lattice box containing every point `z` with `a (|z| + |y - z|) <= b |y|`
/// (all l1), hence every geodesic from `0` to `y` when weights lie in
/// `[a, b]`.
fn geodesic_box(y: &[f64], a: f64, b: f64) -> Result<LatticeBox> {
    if !(a > 0.0) {
        return Err(FppError::Unsupported("localising geodesics needs a > 0".into()));
    }
    let len = l1_norm(y);
    let margin = 0.5 * (b / a * len - len);
    let lo: Vec<f64> = y.iter().map(|v| v.min(0.0) - margin).collect();
    let hi: Vec<f64> = y.iter().map(|v| v.max(0.0) + margin).collect();
    LatticeBox::covering(&lo, &hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Exact,
    CrudeMonteCarlo,
    TiltedMonteCarlo { theta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub n: usize,
    pub dim: usize,
    pub method: Method,
    /// Configurations (exact) or trials (Monte Carlo) on which the event held.
    pub hits: u64,
    pub trials: u64,
    pub probability: f64,
    /// 95% interval; degenerate for exact values.
    pub ci: (f64, f64),
    /// `-ln P / n^d`, or its rule-of-three lower bound when no trial hit.
    pub rate: f64,
    pub rate_is_lower_bound: bool,
    /// Mean and variance of the likelihood ratio over all tilted trials.
    pub lr_mean: Option<f64>,
    pub lr_variance: Option<f64>,
}

fn rate_of(p: f64, n: usize, d: usize) -> f64 {
    if p >= 1.0 {
        0.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        -p.ln() / (n as f64).powi(d as i32)
    }
}

/// Exact probability by enumerating every configuration of a discrete law
/// on the event's box.
pub fn exact_probability(event: &dyn Event, law: &BoundedLaw) -> Result<RateEstimate> {
    if !law.is_discrete() {
        return invalid("exact enumeration needs a discrete law");
    }
    let lattice = event.lattice().clone();
    let edges = lattice.edge_count();
    let atoms = law.atoms().to_vec();
    let bits = edges as f64 * (atoms.len() as f64).log2();
    if bits > EXACT_BUDGET_BITS {
        return Err(FppError::Budget {
            what: format!("enumeration of {} atoms over {edges} edges (bits)", atoms.len()),
            required: bits,
            limit: EXACT_BUDGET_BITS,
        });
    }
    let radix = atoms.len() as u64;
    let total = radix.pow(edges as u32);
    let chunks = total.div_ceil(ENUM_CHUNK);
    let parts = par::try_map_indexed(chunks as usize, |c| -> Result<(f64, u64)> {
        let mut values = vec![0.0; edges];
        let (mut prob, mut hits) = (0.0, 0u64);
        let start = c as u64 * ENUM_CHUNK;
        for code in start..(start + ENUM_CHUNK).min(total) {
            let mut rest = code;
            let mut weight = 1.0;
            for v in values.iter_mut() {
                let atom = atoms[(rest % radix) as usize];
                rest /= radix;
                *v = atom.value;
                weight *= atom.mass;
            }
            let config = WeightConfiguration::from_edge_weights(lattice.clone(), law.clone(), &values)?;
            if event.holds(&config)? {
                prob += weight;
                hits += 1;
            }
        }
        Ok((prob, hits))
    })?;
    let probability = parts.iter().map(|p| p.0).sum::<f64>().min(1.0);
    let hits = parts.iter().map(|p| p.1).sum();
    Ok(RateEstimate {
        n: event.scale(),
        dim: lattice.dim(),
        method: Method::Exact,
        hits,
        trials: total,
        probability,
        ci: (probability, probability),
        rate: rate_of(probability, event.scale(), lattice.dim()),
        rate_is_lower_bound: false,
        lr_mean: None,
        lr_variance: None,
    })
}

/// Monte Carlo estimate with `trials` independent configurations. With a
/// non-zero `tilt`, weights are drawn from the exponentially tilted law and
/// each hit is weighted by its likelihood ratio.
pub fn estimate_probability(event: &dyn Event, law: &BoundedLaw, trials: u64, tilt: Option<f64>, seed: u64) -> Result<RateEstimate> {
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let lattice = event.lattice();
    let (n, d) = (event.scale(), lattice.dim());
    let tilted = match tilt {
        Some(theta) if theta != 0.0 => Some(law.tilted(theta)?),
        _ => None,
    };
    let sampler: &dyn EdgeSampler = match &tilted {
        Some(t) => t,
        None => law,
    };
    let outcomes = par::try_map_indexed(trials as usize, |t| -> Result<(bool, f64)> {
        let config = sample_configuration_with(lattice, law, sampler, seed, t as u64)?;
        let llr = match &tilted {
            Some(tl) => config.lattice().edges().map(|e| tl.log_likelihood_ratio(config.weight(e))).sum(),
            None => 0.0,
        };
        Ok((event.holds(&config)?, llr))
    })?;
    let hits = outcomes.iter().filter(|o| o.0).count() as u64;
    let mut est = match &tilted {
        None => {
            let p = hits as f64 / trials as f64;
            RateEstimate {
                n,
                dim: d,
                method: Method::CrudeMonteCarlo,
                hits,
                trials,
                probability: p,
                ci: stats::wilson_interval(hits, trials),
                rate: rate_of(p, n, d),
                rate_is_lower_bound: false,
                lr_mean: None,
                lr_variance: None,
            }
        }
        Some(tl) => {
            let lr: Vec<f64> = outcomes.iter().map(|o| o.1.exp()).collect();
            let terms: Vec<f64> = outcomes.iter().zip(&lr).map(|(o, w)| if o.0 { *w } else { 0.0 }).collect();
            let (mean, var) = stats::mean_variance(&terms);
            let half = stats::Z95 * (var / trials as f64).sqrt();
            let (lr_mean, lr_var) = stats::mean_variance(&lr);
            RateEstimate {
                n,
                dim: d,
                method: Method::TiltedMonteCarlo { theta: tl.theta() },
                hits,
                trials,
                probability: mean,
                ci: ((mean - half).max(0.0), mean + half),
                rate: rate_of(mean, n, d),
                rate_is_lower_bound: false,
                lr_mean: Some(lr_mean),
                lr_variance: Some(lr_var),
            }
        }
    };
    if hits == 0 {
        // rule of three: P < 3 / trials at roughly 95%
        est.rate = rate_of((3.0 / trials as f64).min(1.0), n, d);
        est.rate_is_lower_bound = true;
    }
    Ok(est)
}

/// Tilt `theta` whose tilted law has mean `target`, found by bisection.
pub fn tilt_for_mean(law: &BoundedLaw, target: f64) -> Result<f64> {
    let (a, b) = (law.a(), law.b());
    if !(a < target && target < b) {
        return invalid(format!("target mean {target} must lie strictly inside ({a}, {b})"));
    }
    let mean = |theta: f64| law.tilted(theta).map(|t| t.mean());
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mean(lo)? > target {
        lo *= 2.0;
        if lo < -1e6 {
            return invalid("no finite tilt reaches the target mean");
        }
    }
    while mean(hi)? < target {
        hi *= 2.0;
        if hi > 1e6 {
            return invalid("no finite tilt reaches the target mean");
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Options shared by the rate-sequence experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct RateOptions {
    pub trials: u64,
    pub tilt: Option<f64>,
    pub seed: u64,
    /// Grid resolution as a multiple of `n` (the grid has `k = n * k_factor`).
    pub k_factor: usize,
    pub slack: Slack,
    /// Enumerate exactly when the budget allows.
    pub exact: bool,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { trials: 10_000, tilt: None, seed: 0, k_factor: 1, slack: Slack::Interpolation, exact: false }
    }
}

/// Rates of the lower event `D_n >= g - eps` on the unit cube, one per `n`.
pub fn elementary_rate_sequence(
    g: &Seminorm,
    dim: usize,
    eps: f64,
    n_list: &[usize],
    law: &BoundedLaw,
    opts: &RateOptions,
) -> Result<Vec<RateEstimate>> {
    let cube = ConvexWindow::unit_cube(dim);
    let bounds = Bounds::new(law.a(), law.b())?;
    if !g.is_norm_valued(dim, bounds) {
        return invalid(format!("target '{g}' must satisfy a|u| <= g(u) <= b|u|"));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let ev = LdEvent::new(&cube, n, n * opts.k_factor.max(1), Target::Norm(g.clone()), eps, Deviation::Lower)?
                .with_slack(opts.slack);
            let enumerable =
                law.is_discrete() && ev.lattice().edge_count() as f64 * (law.atoms().len() as f64).log2() <= EXACT_BUDGET_BITS;
            if opts.exact && enumerable {
                exact_probability(&ev, law)
            } else {
                estimate_probability(&ev, law, opts.trials, opts.tilt, rng::derive_seed(opts.seed, idx as u64))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConstantPoint {
    pub n: usize,
    pub replicas: usize,
    /// Mean of `T(0, n x) / n`.
    pub mean: f64,
    pub variance: f64,
    pub ci: (f64, f64),
}

/// Estimates of the time constant `mu(x)` from `T(0, n x) / n`.
///
/// The configuration box is the bounding box of the l1 ellipse that holds
/// every geodesic. When `a = 0` a positive `speed_floor` must be supplied;
/// it plays the role of `a` in that bound.
pub fn time_constant(
    law: &BoundedLaw,
    x: &[f64],
    n_list: &[usize],
    replicas: usize,
    seed: u64,
    speed_floor: Option<f64>,
) -> Result<Vec<TimeConstantPoint>> {
    if replicas == 0 || x.is_empty() || l1_norm(x) == 0.0 {
        return invalid("time constant needs a non-zero direction and at least one replica");
    }
    let a = match speed_floor {
        Some(s) if s > 0.0 => s.max(law.a()),
        _ => law.a(),
    };
    if !(a > 0.0) {
        return Err(FppError::Unsupported("a = 0 needs an explicit speed floor".into()));
    }
    let origin = vec![0.0; x.len()];
    n_list
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            if n == 0 {
                return invalid("scales must be positive");
            }
            let nf = n as f64;
            let nx: Vec<f64> = x.iter().map(|v| v * nf).collect();
            let lattice = geodesic_box(&nx, a, law.b())?;
            let values = par::try_map_indexed(replicas, |r| {
                let config = sample_configuration(&lattice, law, seed, ((ni as u64) << 32) | r as u64)?;
                Ok::<_, FppError>(continuous_passage_time(&config, &origin, &nx)? / nf)
            })?;
            let (mean, variance) = stats::mean_variance(&values);
            let half = stats::Z95 * (variance / replicas as f64).sqrt();
            Ok(TimeConstantPoint { n, replicas, mean, variance, ci: (mean - half, mean + half) })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateVerdict {
    RateZero,
    Positive,
    Infinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub verdict: RateVerdict,
    /// Largest `g(u) - mu(u)` over the supplied directions.
    pub worst_excess: f64,
    /// Whether an elementary-rate sequence, if given, trends as the verdict
    /// predicts.
    pub trend_consistent: Option<bool>,
}

/// Classify the elementary rate of `g`: infinite when `g` reaches `b |.|_1`
/// in some direction and `nu({b}) = 0`, zero when `g <= mu` on every
/// sampled direction (`mu` given as `(u, estimate, half width)`), positive
/// otherwise.
pub fn rate_zero_region_probe(
    g: &Seminorm,
    law: &BoundedLaw,
    mu: &[(Vec<f64>, f64, f64)],
    sequence: Option<&[RateEstimate]>,
) -> Result<ProbeReport> {
    if mu.is_empty() {
        return invalid("at least one time-constant sample is required");
    }
    let b = law.b();
    let tol = 1e-12 * (1.0 + b);
    let touches_b = mu.iter().any(|(u, _, _)| g.eval(u) >= b * l1_norm(u) - tol) || g.sup_on_l1_sphere() >= b - tol;
    let worst_excess = mu.iter().map(|(u, m, _)| g.eval(u) - m).fold(f64::NEG_INFINITY, f64::max);
    let below = mu.iter().all(|(u, m, h)| g.eval(u) <= m + h + tol);
    let verdict = if touches_b && law.mass_at(b) == 0.0 {
        RateVerdict::Infinite
    } else if below {
        RateVerdict::RateZero
    } else {
        RateVerdict::Positive
    };
    let trend_consistent = sequence.and_then(|s| {
        let (first, last) = (s.first()?, s.last()?);
        Some(match verdict {
            RateVerdict::RateZero => last.rate <= first.rate || last.rate == 0.0,
            RateVerdict::Positive => last.rate > 0.0,
            RateVerdict::Infinite => last.rate >= first.rate,
        })
    });
    Ok(ProbeReport { verdict, worst_excess, trend_consistent })
}

/// Parameters of the assembly experiment: `k^d` tiles of side `n` spaced by
/// `s = floor(n (1 + delta))` inside `[0, m]^d`, `m = ceil(n k (1 + delta))`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyParams {
    pub g: Seminorm,
    pub dim: usize,
    /// Corridor weights are drawn from the law conditioned on `[b - eps, b]`.
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    /// Tilt used to propose tile configurations (rejection sampling).
    pub tile_tilt: Option<f64>,
    pub max_attempts: usize,
    /// Trials for the rate estimates; zero skips them.
    pub rate_trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblySample {
    /// Proposals used per tile.
    pub attempts: Vec<usize>,
    /// `max (g - D')` over grid pairs.
    pub lower_deviation: f64,
    /// `max |D' - g|` over grid pairs.
    pub two_sided_deviation: f64,
    pub hypotheses_hold: bool,
    /// Smallest `D' - (g - offset)` from the corridor certificate.
    pub certificate_margin: f64,
    pub certificate_violations: usize,
    /// Two-sided event at the documented tolerance.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyReport {
    pub m: usize,
    pub stride: usize,
    pub gap: usize,
    /// `C = 3 d`.
    pub constant_c: f64,
    /// `C (eps + n delta^2 / gap)`, equal to `C (eps + delta)` when
    /// `n delta` is an integer.
    pub tolerance: f64,
    /// Corridor bound offset `3 diam (eps + delta2 / delta1)`.
    pub corridor_offset: f64,
    pub samples: Vec<AssemblySample>,
    pub satisfied: usize,
    pub corridor_edges: usize,
    /// `-#corridor ln nu([b - eps, b]) / m^d`.
    pub corridor_cost: f64,
    pub premise: Option<RateEstimate>,
    /// `(k n / m)^d rate_n + corridor_cost`.
    pub rate_bound_at_m: Option<f64>,
    pub rate_at_m: Option<RateEstimate>,
    /// `rate_bound_at_m - rate_at_m`.
    pub margin: Option<f64>,
}

const ASSEMBLY_POINT_LIMIT: usize = 20_000;

/// Assemble tile configurations satisfying the lower event
/// `D_n >= g - delta^2` (compared on the half-lattice) with slow corridors,
/// and evaluate the resulting scale-`m` configuration. Each sample reports
/// the direct two-sided test at the documented tolerance and the corridor
/// certificate for the lower half.
pub fn subadditive_assembly_check(law: &BoundedLaw, p: &AssemblyParams) -> Result<AssemblyReport> {
    let (n, k, d) = (p.n, p.k, p.dim);
    if n == 0 || k == 0 || d == 0 || p.samples == 0 {
        return invalid("n, k, dim and samples must be positive");
    }
    if !(p.delta > 0.0) || !(p.eps > 0.0) {
        return invalid("delta and eps must be positive");
    }
    let stride = (n as f64 * (1.0 + p.delta)).floor() as usize;
    let gap = stride - n;
    if gap == 0 {
        return invalid(format!("n delta = {} is below one lattice step; corridors would be empty", n as f64 * p.delta));
    }
    let m = (n as f64 * k as f64 * (1.0 + p.delta)).ceil() as usize;
    let points = (2 * m + 1).pow(d as u32);
    if points > ASSEMBLY_POINT_LIMIT {
        return Err(FppError::Budget { what: "assembly grid points".into(), required: points as f64, limit: ASSEMBLY_POINT_LIMIT as f64 });
    }
    let b = law.b();
    let bounds = Bounds::new(law.a(), b)?;
    if !p.g.is_norm_valued(d, bounds) {
        return invalid(format!("target '{}' must satisfy a|u| <= g(u) <= b|u|", p.g));
    }
    let corridor_law = law.conditioned_at_least(b - p.eps)?;
    let cube = ConvexWindow::unit_cube(d);
    let premise = LdEvent::new(&cube, n, 2 * n, Target::Norm(p.g.clone()), p.delta * p.delta, Deviation::Lower)?.with_slack(Slack::None);
    let tile_lattice = LatticeBox::cube(d, n as i64)?;
    let big = LatticeBox::cube(d, m as i64)?;
    let target = GridMetric::from_norm(&cube, 2 * m, |u| p.g.eval(u), bounds)?;
    let grid = target.grid().clone();
    let mf = m as f64;
    let scaled: Vec<Vec<f64>> = grid.points().iter().map(|x| x.iter().map(|v| v * mf).collect()).collect();
    let scaled_window = cube.scale(mf);

    let constant_c = 3.0 * d as f64;
    let nd2 = n as f64 * p.delta * p.delta;
    let tolerance = constant_c * (p.eps + nd2 / gap as f64);
    let tile_count = k.pow(d as u32);
    let mut tile_boxes = Vec::with_capacity(tile_count);
    crate::util::for_each_index(&vec![0; d], &vec![k as i64 - 1; d], |j| {
        let lo: Vec<f64> = j.iter().map(|&t| (t as usize * stride) as f64 / mf).collect();
        let hi: Vec<f64> = j.iter().map(|&t| (t as usize * stride + n) as f64 / mf).collect();
        tile_boxes.push((lo, hi));
    });
    let setup = CorridorSetup { tiles: tile_boxes, delta1: gap as f64 / mf, delta2: nd2 / mf, eps: p.eps };
    let corridor_offset = setup.offset(&cube);

    let tilted = match p.tile_tilt {
        Some(t) if t != 0.0 => Some(law.tilted(t)?),
        _ => None,
    };
    let sampler: &dyn EdgeSampler = match &tilted {
        Some(t) => t,
        None => law,
    };
    let tile_seed = rng::derive_seed(p.seed, TAG_TILE);
    let corridor_seed = rng::derive_seed(p.seed, TAG_CORRIDOR);
    let fp = EVENT_FP_TOL * (1.0 + b * d as f64);

    let samples = par::try_map_indexed(p.samples, |s| -> Result<AssemblySample> {
        let mut tiles = Vec::with_capacity(tile_count);
        let mut attempts = Vec::with_capacity(tile_count);
        for j in 0..tile_count {
            let mut found = None;
            for t in 0..p.max_attempts {
                let stream = (((s * tile_count + j) as u64) << 24) | t as u64;
                let cfg = sample_configuration_with(&tile_lattice, law, sampler, tile_seed, stream)?;
                if premise.holds(&cfg)? {
                    found = Some((cfg, t + 1));
                    break;
                }
            }
            let Some((cfg, used)) = found else {
                return Err(FppError::Budget {
                    what: "tile proposals satisfying the premise".into(),
                    required: p.max_attempts as f64 + 1.0,
                    limit: p.max_attempts as f64,
                });
            };
            tiles.push(cfg);
            attempts.push(used);
        }
        let config = WeightConfiguration::from_fn(big.clone(), law.clone(), |e| {
            let (v, axis) = big.edge_parts(e);
            let c = big.coords(v);
            match tile_of_edge(&c, axis, n, stride, k) {
                Some((j, local)) => {
                    let tl = tiles[j].lattice();
                    tiles[j].weight_up(tl.index_of(&local).expect("tile vertex"), axis)
                }
                None => corridor_law.quantile(rng::uniform(corridor_seed, s as u64, e.0 as u64)),
            }
        })?;
        let mut values = passage_matrix(&config, Some(&scaled_window), &scaled)?;
        values.iter_mut().for_each(|v| *v /= mf);
        let cand = GridMetric::from_values_unchecked(cube.clone(), grid.clone(), values, bounds)?;
        let pairs = cand.values().iter().zip(target.values());
        let lower_deviation = pairs.clone().map(|(c, t)| t - c).fold(0.0, f64::max);
        let two_sided_deviation = pairs.map(|(c, t)| (c - t).abs()).fold(0.0, f64::max);
        let cert = certify_corridor(&target, &cand, &setup)?;
        Ok(AssemblySample {
            attempts,
            lower_deviation,
            two_sided_deviation,
            hypotheses_hold: cert.report.hypotheses_hold(),
            certificate_margin: cert.min_margin,
            certificate_violations: cert.violations,
            holds: two_sided_deviation <= tolerance + fp,
        })
    })?;
    let satisfied = samples.iter().filter(|s| s.holds).count();

    let tile_edges = tile_lattice.edge_count();
    let corridor_edges = big.edge_count() - tile_count * tile_edges;
    let slow = law.mass_at_least(b - p.eps);
    let md = mf.powi(d as i32);
    let corridor_cost = if corridor_edges == 0 { 0.0 } else { -(corridor_edges as f64) * slow.ln() / md };
    let (mut premise_est, mut rate_bound_at_m, mut rate_at_m, mut margin) = (None, None, None, None);
    if p.rate_trials > 0 {
        let pe = estimate_probability(&premise, law, p.rate_trials, p.tile_tilt, rng::derive_seed(p.seed, TAG_PREMISE))?;
        let bound = ((k * n) as f64 / mf).powi(d as i32) * pe.rate + corridor_cost;
        let ev_m = LdEvent::new(&cube, m, 2 * m, Target::Metric(target.clone()), tolerance, Deviation::TwoSided)?
            .with_slack(Slack::None);
        let em = estimate_probability(&ev_m, law, p.rate_trials, None, rng::derive_seed(p.seed, TAG_RATE_M))?;
        margin = Some(bound - em.rate);
        rate_bound_at_m = Some(bound);
        rate_at_m = Some(em);
        premise_est = Some(pe);
    }
    Ok(AssemblyReport {
        m,
        stride,
        gap,
        constant_c,
        tolerance,
        corridor_offset,
        samples,
        satisfied,
        corridor_edges,
        corridor_cost,
        premise: premise_est,
        rate_bound_at_m,
        rate_at_m,
        margin,
    })
}

/// Tile index and local lower vertex of the edge leaving `c` along `axis`,
/// when both endpoints lie in the same tile.
fn tile_of_edge(c: &[i64], axis: usize, n: usize, stride: usize, k: usize) -> Option<(usize, Vec<i64>)> {
    let (n, stride) = (n as i64, stride as i64);
    let mut j = 0usize;
    let mut local = Vec::with_capacity(c.len());
    for (i, &v) in c.iter().enumerate() {
        let t = v / stride;
        let off = v - t * stride;
        let top = off + i64::from(i == axis);
        if t >= k as i64 || top > n {
            return None;
        }
        j = j * k + t as usize;
        local.push(off);
    }
    Some((j, local))
}
