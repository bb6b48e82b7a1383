use epoch_gda::metrics::{duality_gap, near_stationarity, stationarity_residual};
use epoch_gda::problems::{Coupling, QuadraticStart};
use epoch_gda::wcsc::regularized_saddle;
use epoch_gda::{run_rng, Point, SaddleProblem, TestbedSpec};
use rand::Rng;

fn quadratic(sigma: f64, box_radius: Option<f64>) -> SaddleProblem {
    TestbedSpec::Quadratic {
        dim_x: 4,
        dim_y: 3,
        mu: 0.7,
        lambda: 1.3,
        coupling: Coupling::Gaussian { scale: 1.5 },
        linear_scale: 1.0,
        box_radius,
        start: QuadraticStart::Origin,
        sigma,
        data_seed: 3,
    }
    .build()
    .unwrap()
}

fn phase_retrieval() -> SaddleProblem {
    TestbedSpec::PhaseRetrieval {
        n_terms: 15,
        dim_x: 3,
        lambda: 1.0,
        box_radius: 1.0,
        rho: None,
        signal_norm: None,
        measurement_noise: 0.1,
        sigma: 0.5,
        data_seed: 5,
    }
    .build()
    .unwrap()
}

fn uniform(rng: &mut impl Rng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-r..r)).collect()
}

#[test]
fn stochastic_subgradients_are_unbiased_with_bounded_second_moment() {
    let p = quadratic(0.8, Some(1.0));
    let mut rng = run_rng(1);
    let x = uniform(&mut rng, 4, 1.0);
    let y = uniform(&mut rng, 3, 1.0);
    let (mut gx, mut gy) = (vec![0.0; 4], vec![0.0; 3]);
    p.subgradients(&x, &y, &mut gx, &mut gy);

    let n = 40_000;
    let (mut mx, mut my) = (vec![0.0; 4], vec![0.0; 3]);
    let (mut sx, mut sy) = (0.0, 0.0);
    let (mut hx, mut hy) = (vec![0.0; 4], vec![0.0; 3]);
    for _ in 0..n {
        p.sample_subgradients(&x, &y, &mut rng, &mut hx, &mut hy);
        mx.iter_mut().zip(&hx).for_each(|(m, v)| *m += v / n as f64);
        my.iter_mut().zip(&hy).for_each(|(m, v)| *m += v / n as f64);
        sx += hx.iter().map(|v| v * v).sum::<f64>() / n as f64;
        sy += hy.iter().map(|v| v * v).sum::<f64>() / n as f64;
    }
    // Five standard errors of a mean of N(0, 0.8^2) draws.
    let tol = 5.0 * 0.8 / (n as f64).sqrt();
    for (m, g) in mx.iter().zip(&gx).chain(my.iter().zip(&gy)) {
        assert!((m - g).abs() < tol, "{m} vs {g}");
    }
    let expect_x = gx.iter().map(|v| v * v).sum::<f64>() + 0.64 * 4.0;
    assert!((sx - expect_x).abs() < 0.05 * expect_x);
    assert!(sx <= p.noise().b1.powi(2) && sy <= p.noise().b2.powi(2));
}

#[test]
fn gap_dominates_primal_suboptimality() {
    let p = quadratic(0.0, Some(1.0));
    let (xs, ys, _) = p.saddle().unwrap();
    assert!(duality_gap(&p, &xs, &ys).unwrap().gap < 1e-9);
    let p_star = p.primal_value(&xs).unwrap();
    let mut rng = run_rng(2);
    for _ in 0..200 {
        let x = uniform(&mut rng, 4, 1.0);
        let y = uniform(&mut rng, 3, 1.0);
        let gap = duality_gap(&p, &x, &y).unwrap().gap;
        assert!(gap + 1e-10 >= p.primal_value(&x).unwrap() - p_star);
        assert!(gap >= 0.0);
    }
}

#[test]
fn unconstrained_quadratic_saddle_solves_the_optimality_system() {
    let p = quadratic(0.0, None);
    let (xs, ys, _) = p.saddle().unwrap();
    let (mut gx, mut gy) = (vec![0.0; 4], vec![0.0; 3]);
    p.subgradients(&xs, &ys, &mut gx, &mut gy);
    assert!(gx.iter().chain(&gy).all(|g| g.abs() < 1e-9), "{gx:?} {gy:?}");
}

#[test]
fn regularized_saddle_is_stationary_for_the_regularized_primal() {
    let p = phase_retrieval();
    let rho = p.rho().unwrap();
    let mut rng = run_rng(3);
    for _ in 0..10 {
        let center = Point::new(uniform(&mut rng, 3, 1.0));
        let (x, y) = regularized_saddle(&p, &center, 2.0 * rho).unwrap();
        let reg = p.regularized(&center, 2.0 * rho).unwrap();
        assert!(stationarity_residual(&reg, &x).unwrap() < 1e-6);
        assert!(reg.best_response_y(&x).unwrap().point.dist(&y) < 1e-12);
    }
    assert!(regularized_saddle(&p, &Point::zeros(3), 0.5 * rho).is_err());
}

#[test]
fn near_stationarity_bounds_the_subdifferential_distance() {
    let p = phase_retrieval();
    let gamma = 2.0 * p.rho().unwrap();
    let mut rng = run_rng(4);
    for _ in 0..20 {
        let x = Point::new(uniform(&mut rng, 3, 1.0));
        let (z, measure) = near_stationarity(&p, &x, gamma).unwrap();
        let residual = stationarity_residual(&p, &z).unwrap();
        assert!(residual <= measure + 1e-6, "{residual} > {measure}");
    }
}

#[test]
fn dro_best_responses_are_feasible() {
    let p = TestbedSpec::Dro { n_losses: 8, dim_x: 3, mu: 0.5, lambda: 1.0, sigma: 0.0, data_seed: 9 }.build().unwrap();
    let (x0, y0) = p.start();
    let report = duality_gap(&p, &x0, &y0).unwrap();
    assert!(p.set_x().contains(&report.best_response_x, 1e-9));
    assert!(p.set_y().contains(&report.best_response_y, 1e-9));
    let (xs, ys, _) = p.saddle().unwrap();
    assert!(duality_gap(&p, &xs, &ys).unwrap().gap < 1e-7);
}
