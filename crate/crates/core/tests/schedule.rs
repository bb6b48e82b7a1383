use epoch_gda::scsc::{epochs_for, theory_schedule, ScheduleInputs, ScheduleMode, ScscSchedule};
use epoch_gda::wcsc::{wcsc_stepsizes, WcscConfig};

fn unit_inputs() -> ScheduleInputs {
    ScheduleInputs { mu: 1.0, lambda: 1.0, b1: 1.0, b2: 1.0, eps0: 1.0, eps: 1.0 / 16.0, delta: 0.1 }
}

#[test]
fn unit_constants_worked_example() {
    let s = theory_schedule(&unit_inputs(), ScheduleMode::Theory).unwrap();
    assert_eq!(s.epochs, 4);
    assert!((s.delta_tilde - 0.025).abs() < 1e-15);
    assert!((s.r1 - 8f64.sqrt()).abs() < 1e-12);

    // Recomputed by hand: ln(40) = 3.688879454113936.
    let l = 3.688879454113936_f64;
    let eta = 8.0 / (40.0 * (5.0 + 3.0 * l));
    assert!((s.eta_x1 - eta).abs() < 1e-15 && (s.eta_y1 - eta).abs() < 1e-15);
    assert!((s.eta_x1 - 0.012_448_17).abs() < 1e-7);
    let t1 = (f64::max(102_400.0 * 4.0 * 3.0 * l, 3200.0 * (5.0 + 3.0 * l)) / 8.0).ceil() as u64;
    assert_eq!(s.t1, t1);
    assert_eq!(s.t1, 566_612);
    assert_eq!(s.total_iterations(), 15 * 566_612);
}

#[test]
fn epoch_sequence_halves_and_doubles() {
    let s = theory_schedule(&unit_inputs(), ScheduleMode::Theory).unwrap();
    let epochs: Vec<_> = s.epochs().collect();
    assert_eq!(epochs.len(), 4);
    for (i, e) in epochs.iter().enumerate() {
        let scale = 2f64.powi(i as i32);
        assert_eq!(e.k, i + 1);
        assert_eq!(e.iterations, s.t1 << i);
        assert_eq!(e.radius_sq, s.r1 * s.r1 / scale);
        assert!((e.radius - s.r1 / scale.sqrt()).abs() < 1e-12);
        assert_eq!(e.eta_x, s.eta_x1 / scale);
        // The gap target of the epoch: min(mu, lambda) R_k^2 / 16 = eps0 / 2^k.
        assert!((e.radius_sq / 16.0 - 1.0 / (2.0 * scale)).abs() < 1e-15);
    }
}

#[test]
fn practical_mode_only_shrinks_lengths() {
    let theory = theory_schedule(&unit_inputs(), ScheduleMode::Theory).unwrap();
    let practical = theory_schedule(&unit_inputs(), ScheduleMode::Practical { scale: 1e-3 }).unwrap();
    assert_eq!(practical.eta_x1, theory.eta_x1);
    assert_eq!(practical.r1, theory.r1);
    assert_eq!(practical.t1, 567);
    assert!(theory_schedule(&unit_inputs(), ScheduleMode::Practical { scale: 0.0 }).is_err());
}

#[test]
fn asymmetric_constants() {
    let inputs = ScheduleInputs { mu: 0.5, lambda: 2.0, b1: 3.0, b2: 1.0, eps0: 4.0, eps: 1.0, delta: 0.2 };
    let s = theory_schedule(&inputs, ScheduleMode::Theory).unwrap();
    assert_eq!(s.epochs, 2);
    let l = 10f64.ln();
    let r1_sq = 4.0 * 2.0 * 4.0 / 0.5;
    assert!((s.r1 * s.r1 - r1_sq).abs() < 1e-12);
    let den = 40.0 * (5.0 + 3.0 * l);
    assert!((s.eta_x1 - 0.5 * r1_sq / (den * 9.0)).abs() < 1e-15);
    assert!((s.eta_y1 - 0.5 * r1_sq / den).abs() < 1e-15);
    let t1 = (f64::max(102_400.0 * 16.0 * 3.0 * l, 3200.0 * (5.0 + 3.0 * l) * 9.0) / (0.25 * r1_sq)).ceil();
    assert_eq!(s.t1, t1 as u64);
}

#[test]
fn epoch_counts() {
    assert_eq!(epochs_for(1.0, 0.5).unwrap(), 1);
    assert_eq!(epochs_for(1.0, 0.3).unwrap(), 2);
    assert_eq!(epochs_for(10.0, 10.0 / 1024.0).unwrap(), 10);
    assert!(epochs_for(1.0, 1.0).is_err());
    assert!(epochs_for(1.0, 0.0).is_err());
}

#[test]
fn single_epoch_manual_schedule() {
    let s = ScscSchedule::manual(1.0, 0.1, 0.1, 5, 1).unwrap();
    assert_eq!(s.epochs().count(), 1);
    assert_eq!(s.total_iterations(), 5);
    assert!(ScscSchedule::manual(1.0, 0.1, 0.1, u64::MAX / 2, 3).is_err());
}

#[test]
fn wcsc_schedule_examples() {
    let e = wcsc_stepsizes(2, 0.5, 4.0).unwrap();
    assert_eq!(e.iterations, 106);
    assert!((e.eta_x - 8.0 / 3.0).abs() < 1e-15);
    assert!((e.eta_y - 1.0 / 6.0).abs() < 1e-15);
    let c = WcscConfig::new(0.5, 4.0, 3).unwrap();
    assert_eq!(c.gamma, 1.0);
    assert_eq!(c.total_iterations(), 71 + 106 + 142);
    assert!(WcscConfig::with_gamma(0.5, 0.5, 4.0, 3).is_err());
}
