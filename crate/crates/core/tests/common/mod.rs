#![allow(dead_code)]

use fpp_core::lattice::{sample_configuration, BoundedLaw, LatticeBox, WeightConfiguration};
use fpp_core::metric::GridMetric;

pub fn two_point() -> BoundedLaw {
    BoundedLaw::two_point(1.0, 2.0, 0.5).unwrap()
}

pub fn sample(lower: &[i64], upper: &[i64], law: &BoundedLaw, seed: u64) -> WeightConfiguration {
    let lat = LatticeBox::new(lower.to_vec(), upper.to_vec()).unwrap();
    sample_configuration(&lat, law, seed, 0).unwrap()
}

pub fn cube(d: usize, n: i64, law: &BoundedLaw, seed: u64) -> WeightConfiguration {
    sample(&vec![0; d], &vec![n; d], law, seed)
}

/// Panics with the audit report unless the metric is clean.
pub fn assert_clean(m: &GridMetric) {
    let r = m.validate();
    assert!(r.is_clean(), "metric audit failed: {r:?}");
}

use fpp_core::geometry::ConvexWindow;
use fpp_core::ld::{CrossingEvent, Deviation, Event, LdEvent, Slack, Target};
use fpp_core::metric::Seminorm;

/// Wilson score interval with continuity correction at `z` standard
/// deviations. The plain interval undercovers when `trials * p` is far
/// below one: a single hit already excludes the true probability.
pub fn wilson_cc(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let x = hits as f64;
    let p = x / n;
    let z2 = z * z;
    let denom = 2.0 * (n + z2);
    let lo = if hits == 0 {
        0.0
    } else {
        ((2.0 * x + z2 - 1.0 - z * (z2 - 2.0 - 1.0 / n + 4.0 * p * (n * (1.0 - p) + 1.0)).sqrt()) / denom).max(0.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        ((2.0 * x + z2 + 1.0 + z * (z2 + 2.0 - 1.0 / n + 4.0 * p * (n * (1.0 - p) - 1.0)).sqrt()) / denom).min(1.0)
    };
    (lo, hi)
}

/// Events on the 12 edges of [0, 2]^2 with the law they are tested under.
pub fn enumerable_events() -> Vec<(String, Box<dyn Event>, BoundedLaw)> {
    let cube = ConvexWindow::unit_cube(2);
    let mut out: Vec<(String, Box<dyn Event>, BoundedLaw)> = Vec::new();
    let laws = [("p0.5", two_point()), ("p0.3", BoundedLaw::two_point(1.0, 2.0, 0.3).unwrap())];
    for (lname, law) in &laws {
        for (c, eps) in [(1.25, 0.1), (1.5, 0.1), (1.5, 0.3), (1.75, 0.1), (1.75, 0.3)] {
            for k in [1usize, 2] {
                let ev = LdEvent::new(&cube, 2, k, Target::Norm(Seminorm::ScaledL1(c)), eps, Deviation::Lower)
                    .unwrap()
                    .with_slack(Slack::None);
                out.push((format!("lower c={c} eps={eps} k={k} {lname}"), Box::new(ev), law.clone()));
            }
        }
        for c in [1.25, 1.5] {
            let ev = LdEvent::new(&cube, 2, 2, Target::Norm(Seminorm::ScaledL1(c)), 0.3, Deviation::TwoSided)
                .unwrap()
                .with_slack(Slack::None);
            out.push((format!("two-sided c={c} {lname}"), Box::new(ev), law.clone()));
        }
        for lower in [[1.5, f64::NEG_INFINITY], [1.5, 1.5], [2.0, 1.0]] {
            out.push((format!("crossing {lower:?} {lname}"), Box::new(CrossingEvent::new(2, lower.to_vec()).unwrap()), law.clone()));
        }
    }
    out
}
