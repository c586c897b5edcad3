//! Sequential fallback versus the rayon backend on the three heaviest
//! loops: metric rows, Monte Carlo trials and the prescribe sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpp_core::geometry::ConvexWindow;
use fpp_core::lattice::{sample_configuration, BoundedLaw, LatticeBox};
use fpp_core::ld::{estimate_probability, tilt_for_mean, Deviation, LdEvent, Target};
use fpp_core::metric::{prescribe_metric, Bounds, GradientField, Seminorm};
use fpp_core::par;
use fpp_core::passage::rescaled_metric;

fn modes<R>(c: &mut Criterion, group: &str, mut f: impl FnMut() -> R) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| b.iter(|| par::sequential(&mut f)));
    g.bench_function(BenchmarkId::from_parameter("parallel"), |b| b.iter(&mut f));
    g.finish();
}

fn bench(c: &mut Criterion) {
    let law = BoundedLaw::two_point(1.0, 2.0, 0.5).unwrap();
    let cube = ConvexWindow::unit_cube(2);

    let config = sample_configuration(&LatticeBox::cube(2, 16).unwrap(), &law, 1, 0).unwrap();
    modes(c, "rescaled_metric_n16_k8", || rescaled_metric(&config, &cube, 16, 8).unwrap());

    let ev = LdEvent::new(&cube, 3, 3, Target::Norm(Seminorm::ScaledL1(1.6)), 0.1, Deviation::Lower).unwrap();
    let theta = tilt_for_mean(&law, 1.8).unwrap();
    modes(c, "estimate_probability_2000", || estimate_probability(&ev, &law, 2000, Some(theta), 7).unwrap());

    let bounds = Bounds::new(1.0, 2.0).unwrap();
    let field = GradientField::uniform(cube.clone(), 4, bounds, |z| Seminorm::ScaledL1(1.0 + 0.5 * (z[0] + z[1]))).unwrap();
    modes(c, "prescribe_metric_m16", || prescribe_metric(&field, 16).unwrap());
}

criterion_group!(benches, bench);
criterion_main!(benches);
