//! Discretised metrics on convex windows.
//!
//! A [`GridMetric`] stores a metric on the points of a grid inside a convex
//! window; values between grid points come from the Lipschitz extension.
//! Metrics are produced by rescaled passage times, by prescribing a
//! [`GradientField`], and by restriction, stitching, scaling, translation
//! and symmetrisation of existing ones.

mod build;
mod corridor;
mod grid;
mod io;
mod seminorm;

pub use build::{estimate_gradient, prescribe_metric, restrict_metric, stitch_metrics, symmetrize, GradientEstimate};
pub(crate) use build::{prescribed_distances_from, LevelGraph};
pub use corridor::{
    certify_corridor, check_corridor_hypotheses, corridor_lower_bound, CorridorCertificate, CorridorReport, CorridorSetup,
};
pub use grid::{Bounds, Grid, GridMetric, MetricReport};
pub use io::{read_field, read_metric, write_field, write_metric};
pub use seminorm::{l1_sphere_directions, GradientField, SampledSeminorm, Seminorm};
