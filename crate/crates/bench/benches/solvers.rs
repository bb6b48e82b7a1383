use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use epoch_gda::problems::{Coupling, QuadraticStart};
use epoch_gda::scsc::run_epoch_scsc;
use epoch_gda::vecspace::{project, project_intersection};
use epoch_gda::wcsc::{run_epoch_gda_wcsc, WcscConfig};
use epoch_gda::{run_rng, ConvexSet, Point, TestbedSpec};

fn projections(c: &mut Criterion) {
    let d = 50;
    let p = Point::new((0..d).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.4).collect());
    let sets = [
        ("box", ConvexSet::cube(d, 1.0).unwrap()),
        ("ball", ConvexSet::ball(Point::zeros(d), 1.0).unwrap()),
        ("simplex", ConvexSet::simplex(d).unwrap()),
    ];
    let mut group = c.benchmark_group("projection");
    for (name, set) in &sets {
        group.bench_with_input(BenchmarkId::new("set", name), set, |b, set| b.iter(|| project(set, black_box(&p))));
        let center = project(set, &Point::zeros(d)).unwrap();
        group.bench_with_input(BenchmarkId::new("set_and_ball", name), set, |b, set| {
            b.iter(|| project_intersection(set, &center, 0.5, black_box(&p)))
        });
    }
    group.finish();
}

fn scsc_epoch(c: &mut Criterion) {
    let mut group = c.benchmark_group("scsc_epoch_1000_iters");
    for dim in [2, 20, 100] {
        let problem = TestbedSpec::Quadratic {
            dim_x: dim,
            dim_y: dim,
            mu: 1.0,
            lambda: 1.0,
            coupling: Coupling::Gaussian { scale: 1.0 },
            linear_scale: 1.0,
            box_radius: Some(1.0),
            start: QuadraticStart::OppositeCorner,
            sigma: 1.0,
            data_seed: 0,
        }
        .build()
        .unwrap();
        let (x0, y0) = problem.start();
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            let mut rng = run_rng(0);
            b.iter(|| run_epoch_scsc(&problem, &x0, &y0, 1e-3, 1e-3, 1.0, 1000, &mut rng).unwrap())
        });
    }
    group.finish();
}

fn wcsc_run(c: &mut Criterion) {
    let problem = TestbedSpec::PhaseRetrieval {
        n_terms: 50,
        dim_x: 10,
        lambda: 1.0,
        box_radius: 1.0,
        rho: None,
        signal_norm: None,
        measurement_noise: 0.0,
        sigma: 1.0,
        data_seed: 0,
    }
    .build()
    .unwrap();
    let (x0, y0) = problem.start();
    let config = WcscConfig::for_problem(&problem, 5).unwrap();
    c.bench_function("wcsc_5_epochs_phase_retrieval", |b| {
        let mut rng = run_rng(0);
        b.iter(|| run_epoch_gda_wcsc(&problem, &x0, &y0, &config, &mut rng).unwrap())
    });
}

criterion_group!(benches, projections, scsc_epoch, wcsc_run);
criterion_main!(benches);
