use epoch_gda::baselines::{power_of_two_checkpoints, run_pdsgd_with_checkpoints, StepRule};
use epoch_gda::metrics::{duality_gap, fit_loglog_slope};
use epoch_gda::problems::{Coupling, QuadraticStart};
use epoch_gda::scsc::{
    estimate_eps0, run_epoch_gda_scsc, run_epoch_gda_scsc_observed, theory_schedule, ScheduleInputs, ScheduleMode,
};
use epoch_gda::wcsc::{epoch_length, run_epoch_gda_wcsc, WcscConfig};
use epoch_gda::{run_rng, Error, SaddleProblem, TestbedSpec};
use rand::Rng;
use rand_distr::StandardNormal;

fn quadratic(sigma: f64) -> SaddleProblem {
    TestbedSpec::Quadratic {
        dim_x: 3,
        dim_y: 3,
        mu: 1.0,
        lambda: 0.5,
        coupling: Coupling::Gaussian { scale: 1.0 },
        linear_scale: 2.0,
        box_radius: Some(1.0),
        start: QuadraticStart::OppositeCorner,
        sigma,
        data_seed: 1,
    }
    .build()
    .unwrap()
}

fn phase_retrieval() -> SaddleProblem {
    TestbedSpec::PhaseRetrieval {
        n_terms: 12,
        dim_x: 3,
        lambda: 1.0,
        box_radius: 1.0,
        rho: None,
        signal_norm: None,
        measurement_noise: 0.0,
        sigma: 0.5,
        data_seed: 2,
    }
    .build()
    .unwrap()
}

#[test]
fn deterministic_epochs_meet_their_gap_targets() {
    let p = quadratic(0.0);
    let (x0, y0) = p.start();
    let eps0 = estimate_eps0(&p, &x0, &y0).unwrap();
    let inputs = ScheduleInputs::from_problem(&p, eps0, eps0 / 64.0, 0.1).unwrap();
    let schedule = theory_schedule(&inputs, ScheduleMode::Practical { scale: 1e-3 }).unwrap();
    let mut epochs = 0;
    run_epoch_gda_scsc_observed(&p, &x0, &y0, &schedule, &mut run_rng(0), |r| {
        let gap = duality_gap(&p, r.x_avg, r.y_avg)?.gap;
        assert!(gap <= 0.5 * r.params.radius_sq / 16.0, "epoch {}: {gap}", r.params.k);
        epochs += 1;
        Ok(())
    })
    .unwrap();
    assert_eq!(epochs, 6);
}

#[test]
fn scsc_runs_are_reproducible_per_seed() {
    let p = quadratic(1.0);
    let (x0, y0) = p.start();
    let inputs = ScheduleInputs::from_problem(&p, 10.0, 10.0 / 16.0, 0.1).unwrap();
    let schedule = theory_schedule(&inputs, ScheduleMode::Practical { scale: 1e-3 }).unwrap();
    let a = run_epoch_gda_scsc(&p, &x0, &y0, &schedule, &mut run_rng(5)).unwrap();
    let b = run_epoch_gda_scsc(&p, &x0, &y0, &schedule, &mut run_rng(5)).unwrap();
    let c = run_epoch_gda_scsc(&p, &x0, &y0, &schedule, &mut run_rng(6)).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.y, b.y);
    assert_ne!(a.x, c.x);
    assert_eq!(a.trace.len(), 4);
    assert_eq!(a.trace.total_iterations(), schedule.total_iterations());
    assert!(a.trace.rows.iter().all(|r| r.gap.is_some() && r.radius.is_some()));
}

#[test]
fn scsc_rejects_weakly_convex_problems() {
    let p = phase_retrieval();
    let err = ScheduleInputs::from_problem(&p, 1.0, 0.5, 0.1).unwrap_err();
    assert!(matches!(err, Error::ModeMismatch { .. }));
}

#[test]
fn pdsgd_records_each_checkpoint() {
    let p = quadratic(0.5);
    let (x0, y0) = p.start();
    let checkpoints = power_of_two_checkpoints(3000);
    assert_eq!(checkpoints.last(), Some(&3000));
    let run =
        run_pdsgd_with_checkpoints(&p, &x0, &y0, &checkpoints, StepRule::default_for(&p).unwrap(), &mut run_rng(1))
            .unwrap();
    let iters: Vec<u64> = run.trace.rows.iter().map(|r| r.iters_cumulative).collect();
    assert_eq!(iters, checkpoints);
    let first = run.trace.rows[0].gap.unwrap();
    assert!(run.trace.final_gap().unwrap() < first);
}

#[test]
fn wcsc_run_structure() {
    let p = phase_retrieval();
    let (x0, y0) = p.start();
    let config = WcscConfig::for_problem(&p, 6).unwrap();
    let run = run_epoch_gda_wcsc(&p, &x0, &y0, &config, &mut run_rng(2)).unwrap();
    assert_eq!(run.centers.len(), 7);
    assert!((1..=6).contains(&run.tau));
    assert_eq!(run.x, run.centers[run.tau - 1]);
    let mut total = 0;
    for (k, row) in run.trace.rows.iter().enumerate() {
        total += epoch_length(k + 1);
        assert_eq!(row.iters_cumulative, total);
        assert!(row.near_stationarity.unwrap() >= 0.0);
        assert!(p.set_x().contains(&run.centers[k], 1e-12));
    }
    assert_eq!(total, config.total_iterations());

    let scsc = quadratic(0.0);
    let (qx, qy) = scsc.start();
    assert!(run_epoch_gda_wcsc(&scsc, &qx, &qy, &config, &mut run_rng(0)).is_err());
}

#[test]
fn loglog_fit_recovers_noisy_power_law() {
    let mut rng = run_rng(8);
    for slope in [-1.0, -0.5, -2.0 / 3.0] {
        let points: Vec<(f64, f64)> = (10..=20)
            .map(|k| {
                let t = 2f64.powi(k);
                let noise: f64 = rng.sample(StandardNormal);
                (t, 3.0 * t.powf(slope) * (0.1 * noise).exp())
            })
            .collect();
        let fit = fit_loglog_slope(&points).unwrap();
        assert!((fit.slope - slope).abs() < 0.05, "{} vs {slope}", fit.slope);
    }
    assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
    assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (4.0, 0.1)]).is_err());
}
