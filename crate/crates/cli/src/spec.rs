//! Run files in TOML.
//!
//! A run file has a top-level `law` (and optionally `seed`) plus exactly one
//! section named after the subcommand being run. Unknown keys are errors.
//! Everything is validated before any computation starts.

use fpp_core::geometry::ConvexWindow;
use fpp_core::lattice::BoundedLaw;
use fpp_core::metric::Seminorm;
use serde::Deserialize;

use crate::error::{spec_err, CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub seed: Option<u64>,
    pub law: String,
    pub simulate: Option<SimulateSpec>,
    pub geodesic: Option<GeodesicSpec>,
    pub crossing: Option<CrossingSpec>,
    pub ball: Option<BallSpec>,
    #[serde(rename = "rate-estimate")]
    pub rate_estimate: Option<RateEstimateSpec>,
    #[serde(rename = "elementary-rate")]
    pub elementary_rate: Option<ElementaryRateSpec>,
    #[serde(rename = "assembly-check")]
    pub assembly_check: Option<AssemblySpec>,
    pub functional: Option<FunctionalSpec>,
    #[serde(rename = "point-point")]
    pub point_point: Option<PointPointSpec>,
    #[serde(rename = "time-constant")]
    pub time_constant: Option<TimeConstantSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    #[serde(default)]
    pub queries: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSpec {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub window: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingSpec {
    pub dim: usize,
    pub n: Vec<usize>,
    pub replicas: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub dim: usize,
    pub n: Vec<usize>,
    pub mesh: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationSpec {
    Lower,
    TwoSided,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SlackSpec {
    #[default]
    None,
    Interpolation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEstimateSpec {
    pub window: String,
    pub n: usize,
    pub k: usize,
    pub target: String,
    pub eps: f64,
    pub deviation: DeviationSpec,
    #[serde(default)]
    pub slack: SlackSpec,
    pub trials: u64,
    pub tilt: Option<f64>,
    /// Alternative to `tilt`: the tilted edge mean to aim for.
    pub tilt_mean: Option<f64>,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementaryRateSpec {
    pub dim: usize,
    pub target: String,
    pub eps: f64,
    pub n: Vec<usize>,
    pub trials: u64,
    pub tilt: Option<f64>,
    pub tilt_mean: Option<f64>,
    #[serde(default = "one")]
    pub k_factor: usize,
    #[serde(default)]
    pub slack: SlackSpec,
    #[serde(default)]
    pub exact: bool,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblySpec {
    pub target: String,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub tile_tilt_mean: Option<f64>,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default)]
    pub rate_trials: u64,
}

fn default_attempts() -> usize {
    100_000
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSpec {
    Bound,
    Empirical,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub window: String,
    pub cuts: Option<Vec<Vec<f64>>>,
    pub cells: Vec<String>,
    pub model: ModelSpec,
    pub table: Option<Vec<[f64; 2]>>,
    pub k: usize,
    /// Also write the prescribed metric on this grid resolution.
    pub metric_resolution: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointPointSpec {
    pub x: Vec<f64>,
    pub zeta: Vec<f64>,
    pub model: ModelSpec,
    pub table: Option<Vec<[f64; 2]>>,
    #[serde(default = "eight")]
    pub tiles: usize,
    #[serde(default = "eight")]
    pub resolution: usize,
    #[serde(default = "four")]
    pub max_sweeps: usize,
    #[serde(default = "default_bisection")]
    pub bisection_steps: usize,
}

fn eight() -> usize {
    8
}
fn four() -> usize {
    4
}
fn default_bisection() -> usize {
    24
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConstantSpec {
    pub x: Vec<f64>,
    pub n: Vec<usize>,
    pub replicas: usize,
    pub speed_floor: Option<f64>,
}

pub fn parse_spec(text: &str) -> CliResult<SpecFile> {
    toml::from_str(text).map_err(|e| CliError::Spec(e.message().to_string()))
}

impl SpecFile {
    /// Names of the sections present, in declaration order.
    pub fn sections(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut push = |present: bool, name| {
            if present {
                v.push(name)
            }
        };
        push(self.simulate.is_some(), "simulate");
        push(self.geodesic.is_some(), "geodesic");
        push(self.crossing.is_some(), "crossing");
        push(self.ball.is_some(), "ball");
        push(self.rate_estimate.is_some(), "rate-estimate");
        push(self.elementary_rate.is_some(), "elementary-rate");
        push(self.assembly_check.is_some(), "assembly-check");
        push(self.functional.is_some(), "functional");
        push(self.point_point.is_some(), "point-point");
        push(self.time_constant.is_some(), "time-constant");
        v
    }

    /// Exactly the section for `command` must be present.
    pub fn require_only(&self, command: &str) -> CliResult<()> {
        let s = self.sections();
        if s != [command] {
            return spec_err(format!("spec for '{command}' must contain exactly a [{command}] section, found {s:?}"));
        }
        Ok(())
    }

    pub fn law(&self) -> CliResult<BoundedLaw> {
        self.law.parse().map_err(|e| CliError::Spec(format!("law: {e}")))
    }
}

pub fn window(s: &str) -> CliResult<ConvexWindow> {
    s.parse().map_err(|e| CliError::Spec(format!("window '{s}': {e}")))
}

pub fn seminorm(s: &str) -> CliResult<Seminorm> {
    s.parse().map_err(|e| CliError::Spec(format!("seminorm '{s}': {e}")))
}

pub fn check(cond: bool, msg: impl Into<String>) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        spec_err(msg)
    }
}

pub fn positive_list(name: &str, v: &[usize]) -> CliResult<()> {
    check(!v.is_empty() && v.iter().all(|n| *n > 0), format!("{name} must be a non-empty list of positive integers"))
}

pub fn finite_point(name: &str, v: &[f64], dim: Option<usize>) -> CliResult<()> {
    check(!v.is_empty() && v.iter().all(|x| x.is_finite()), format!("{name} must be a non-empty list of finite numbers"))?;
    if let Some(d) = dim {
        check(v.len() == d, format!("{name} has {} coordinates, expected {d}", v.len()))?;
    }
    Ok(())
}
