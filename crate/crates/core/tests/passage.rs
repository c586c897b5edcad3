mod common;
mod oracles;

use common::{assert_clean, cube, sample, two_point};
use fpp_core::geometry::{l1, ConvexWindow};
use fpp_core::lattice::{BoundedLaw, LatticeBox, WeightConfiguration};
use fpp_core::passage::{
    box_passage_time, continuous_geodesic, continuous_passage_time, crossing_times, discrete_geodesic,
    discrete_passage_time, growing_ball, passage_matrix, rescaled_metric,
};
use proptest::prelude::*;

fn uniform() -> BoundedLaw {
    BoundedLaw::uniform(1.0, 2.0).unwrap()
}

fn vertex(d: usize, n: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0..=n, d)
}

/// Points with coordinates in (1/4) Z inside [0, n]^d.
fn quarter_point(d: usize, n: i64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0..=4 * n).prop_map(|c| c as f64 / 4.0), d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dijkstra_matches_path_enumeration_2d(seed in any::<u64>(), x in vertex(2, 3), y in vertex(2, 3)) {
        let c = cube(2, 3, &uniform(), seed);
        prop_assert_eq!(discrete_passage_time(&c, &x, &y).unwrap(), oracles::simple_path_min(&c, &x, &y));
    }

    #[test]
    fn dijkstra_matches_path_enumeration_3d(seed in any::<u64>(), x in vertex(3, 2), y in vertex(3, 2)) {
        let c = cube(3, 2, &two_point(), seed);
        prop_assert_eq!(discrete_passage_time(&c, &x, &y).unwrap(), oracles::simple_path_min(&c, &x, &y));
    }

    #[test]
    fn real_passage_time_agrees_on_vertices(seed in any::<u64>(), x in vertex(2, 4), y in vertex(2, 4)) {
        let c = cube(2, 4, &uniform(), seed);
        let xf: Vec<f64> = x.iter().map(|v| *v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|v| *v as f64).collect();
        prop_assert_eq!(continuous_passage_time(&c, &xf, &yf).unwrap(), discrete_passage_time(&c, &x, &y).unwrap());
    }

    #[test]
    fn real_passage_time_matches_refined_search(seed in any::<u64>(), x in quarter_point(2, 3), y in quarter_point(2, 3)) {
        let c = cube(2, 3, &uniform(), seed);
        let got = continuous_passage_time(&c, &x, &y).unwrap();
        let want = oracles::refined_passage(&c, &x, &y, 4);
        prop_assert!((got - want).abs() <= 1e-9, "{} vs {}", got, want);
    }

    #[test]
    fn geodesics_stay_localised(seed in any::<u64>(), x in quarter_point(2, 4), y in quarter_point(2, 4)) {
        let c = cube(2, 4, &two_point(), seed);
        let path = continuous_geodesic(&c, &x, &y).unwrap();
        prop_assert!(path.l1_length() <= 2.0 * l1(&x, &y) + 1e-12);
        prop_assert_eq!(path.points.first().unwrap(), &x);
        prop_assert_eq!(path.points.last().unwrap(), &y);
        prop_assert!(path.times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn lattice_geodesics_stay_localised(seed in any::<u64>(), x in vertex(3, 3), y in vertex(3, 3)) {
        let c = cube(3, 3, &two_point(), seed);
        let p = discrete_geodesic(&c, &x, &y).unwrap();
        let dist: i64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(p.edges.len() as i64 <= 2 * dist);
        let total: f64 = p.edges.iter().map(|e| c.weight(*e)).sum();
        prop_assert!((total - p.time).abs() <= 1e-12);
    }

    #[test]
    fn window_never_shortens(seed in any::<u64>(), x in quarter_point(2, 2), y in quarter_point(2, 2)) {
        let c = sample(&[-1, -1], &[3, 3], &uniform(), seed);
        let w = ConvexWindow::cube(2, 0.0, 2.0).unwrap();
        let inside = box_passage_time(&c, &w, &x, &y).unwrap();
        let free = continuous_passage_time(&c, &x, &y).unwrap();
        prop_assert!(inside >= free - 1e-12);
        prop_assert!(inside <= 2.0 * l1(&x, &y) + 1e-12);
    }
}

#[test]
fn refined_search_in_three_dimensions() {
    for seed in 0..10u64 {
        let c = cube(3, 2, &uniform(), seed);
        let x = vec![0.25, 1.5, 0.0];
        let y = vec![2.0, 0.75, 1.25];
        let got = continuous_passage_time(&c, &x, &y).unwrap();
        let want = oracles::refined_passage(&c, &x, &y, 4);
        assert!((got - want).abs() <= 1e-9, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn passage_matrix_is_a_metric() {
    let c = cube(2, 4, &uniform(), 9);
    let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 4) as f64 * 1.1, (i / 4) as f64 * 1.3 + 0.2]).collect();
    let m = passage_matrix(&c, None, &pts).unwrap();
    let n = pts.len();
    for i in 0..n {
        assert_eq!(m[i * n + i], 0.0);
        for j in 0..n {
            assert_eq!(m[i * n + j], m[j * n + i]);
            for k in 0..n {
                assert!(m[i * n + j] <= m[i * n + k] + m[k * n + j] + 1e-12);
            }
        }
    }
}

#[test]
fn rescaled_metric_is_admissible() {
    let law = uniform();
    for seed in 0..4 {
        let c = cube(2, 8, &law, seed);
        let m = rescaled_metric(&c, &ConvexWindow::unit_cube(2), 8, 4).unwrap();
        assert_clean(&m);
    }
    let c = sample(&[0, 0], &[6, 6], &law, 1);
    let tri = ConvexWindow::polytope(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert_clean(&rescaled_metric(&c, &tri, 6, 4).unwrap());
}

#[test]
fn rescaled_metric_needs_cover() {
    let c = cube(2, 3, &uniform(), 0);
    assert!(rescaled_metric(&c, &ConvexWindow::unit_cube(2), 4, 2).is_err());
}

#[test]
fn constant_weights_give_l1() {
    let lat = LatticeBox::cube(2, 5).unwrap();
    let c = WeightConfiguration::from_fn(lat, BoundedLaw::dirac(1.5).unwrap(), |_| 1.5).unwrap();
    let t = continuous_passage_time(&c, &[0.3, 0.2], &[4.1, 2.7]).unwrap();
    assert!((t - 1.5 * (3.8 + 2.5)).abs() < 1e-12);
    assert_eq!(crossing_times(&c, 5).unwrap(), vec![1.5, 1.5]);
}

#[test]
fn crossing_times_within_envelope() {
    for seed in 0..20 {
        let c = cube(2, 6, &two_point(), seed);
        for t in crossing_times(&c, 6).unwrap() {
            assert!((1.0..=2.0).contains(&t));
        }
    }
}

#[test]
fn growing_ball_of_constant_weights_is_l1_ball() {
    let lat = LatticeBox::new(vec![-4, -4], vec![4, 4]).unwrap();
    let c = WeightConfiguration::from_fn(lat, BoundedLaw::dirac(1.0).unwrap(), |_| 1.0).unwrap();
    let ball = growing_ball(&c, 4, 0.25).unwrap();
    let expected = (-4..=4).flat_map(|i| (-4..=4).map(move |j| (i, j))).filter(|(i, j)| i32::abs(*i) + i32::abs(*j) <= 4).count();
    assert_eq!(ball.points.len(), expected);
}
