//! Epoch-GDA for strongly-convex strongly-concave problems.
//!
//! Each epoch runs projected stochastic descent ascent confined to balls of
//! radius `R_k` around the epoch's starting pair, then restarts from the
//! uniform average of the epoch's iterates. Between epochs both step sizes
//! halve, `R_k` shrinks by `sqrt(2)` and the epoch length doubles, so the
//! duality-gap bound halves per epoch while the total iteration count only
//! doubles.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::duality_gap;
use crate::problems::SaddleProblem;
use crate::trace::{Trace, TraceRow};
use crate::vecspace::{project_intersection_in_place, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Epoch lengths exactly as the high-probability analysis requires.
    Theory,
    /// Initial epoch length multiplied by `scale`; all ratios unchanged.
    Practical { scale: f64 },
}

impl ScheduleMode {
    pub const DEFAULT_PRACTICAL_SCALE: f64 = 1e-3;
}

/// Initial parameters of an SCSC run. Later epochs follow from
/// [`ScscSchedule::epochs`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScscSchedule {
    pub r1: f64,
    pub eta_x1: f64,
    pub eta_y1: f64,
    pub t1: u64,
    pub epochs: usize,
    pub delta_tilde: f64,
    pub mode: ScheduleMode,
}

/// Parameters of epoch `k` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochParams {
    pub k: usize,
    pub radius: f64,
    /// `radius^2`, halved exactly between epochs.
    pub radius_sq: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub iterations: u64,
}

/// Problem constants the tuned schedule depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleInputs {
    pub mu: f64,
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
    /// Upper bound on the initial duality gap.
    pub eps0: f64,
    /// Target duality gap.
    pub eps: f64,
    /// Failure probability.
    pub delta: f64,
}

impl ScheduleInputs {
    /// Constants read from a problem; `eps0` must be supplied (see
    /// [`crate::problems::SaddleProblem`] testbeds and [`estimate_eps0`]).
    pub fn from_problem(problem: &SaddleProblem, eps0: f64, eps: f64, delta: f64) -> Result<Self> {
        let mu = problem.mu().ok_or(Error::ModeMismatch { expected: "SCSC", actual: "WCSC" })?;
        Ok(ScheduleInputs {
            mu,
            lambda: problem.lambda(),
            b1: problem.noise().b1,
            b2: problem.noise().b2,
            eps0,
            eps,
            delta,
        })
    }
}

impl ScscSchedule {
    /// A hand-set schedule.
    pub fn manual(r1: f64, eta_x1: f64, eta_y1: f64, t1: u64, epochs: usize) -> Result<Self> {
        let s = ScscSchedule { r1, eta_x1, eta_y1, t1, epochs, delta_tilde: f64::NAN, mode: ScheduleMode::Theory };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.r1) || !pos(self.eta_x1) || !pos(self.eta_y1) {
            return Err(Error::InvalidSchedule("R1 and step sizes must be positive and finite".into()));
        }
        if self.t1 == 0 || self.epochs == 0 {
            return Err(Error::InvalidSchedule("T1 and K must be positive".into()));
        }
        total_iterations(self.t1, self.epochs)?;
        Ok(())
    }

    /// Per-epoch parameters: step sizes halve, `R^2` halves, lengths double.
    pub fn epochs(&self) -> impl Iterator<Item = EpochParams> + '_ {
        let mut params = EpochParams {
            k: 1,
            radius: self.r1,
            radius_sq: self.r1 * self.r1,
            eta_x: self.eta_x1,
            eta_y: self.eta_y1,
            iterations: self.t1,
        };
        (0..self.epochs).map(move |i| {
            let current = params;
            if i + 1 < self.epochs {
                params.k += 1;
                params.radius_sq *= 0.5;
                params.radius = params.radius_sq.sqrt();
                params.eta_x *= 0.5;
                params.eta_y *= 0.5;
                params.iterations *= 2;
            }
            current
        })
    }

    /// `T1 (2^K - 1)`.
    pub fn total_iterations(&self) -> u64 {
        total_iterations(self.t1, self.epochs).expect("validated at construction")
    }
}

fn total_iterations(t1: u64, epochs: usize) -> Result<u64> {
    let overflow = || Error::InvalidSchedule(format!("T1 = {t1} over K = {epochs} epochs overflows 2^63 iterations"));
    if epochs >= 63 {
        return Err(overflow());
    }
    let total = t1.checked_mul((1u64 << epochs) - 1).ok_or_else(overflow)?;
    if total > i64::MAX as u64 {
        return Err(overflow());
    }
    Ok(total)
}

/// Number of epochs needed to halve `eps0` down to `eps`: `ceil(log2(eps0/eps))`.
pub fn epochs_for(eps0: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0) || !(eps0 > 0.0) || !eps.is_finite() || !eps0.is_finite() {
        return Err(Error::InvalidSchedule(format!("eps0 = {eps0} and eps = {eps} must be positive")));
    }
    if eps >= eps0 {
        return Err(Error::InvalidSchedule(format!("eps = {eps} >= eps0 = {eps0}: no epochs needed")));
    }
    // A ratio that is a power of two up to rounding should not gain an epoch.
    let k = ((eps0 / eps).log2() - 1e-12).ceil();
    Ok(k.max(1.0) as usize)
}

/// Schedule meeting the high-probability gap guarantee:
///
/// * `K = ceil(log2(eps0/eps))`, `δ̃ = δ/K`
/// * `R1 = 2 sqrt(2 eps0 / min(mu, lambda))`
/// * `η_x = min(mu, lambda) R1^2 / (40 (5 + 3 ln(1/δ̃)) B1^2)`, `η_y` likewise with `B2`
/// * `T1 = ceil(max(320^2 (B1+B2)^2 3 ln(1/δ̃), 3200 (5 + 3 ln(1/δ̃)) max(B1^2, B2^2)) / (min(mu, lambda)^2 R1^2))`
///
/// In practical mode `T1` is `ceil(scale ·` the unrounded value `)`, at least 1.
pub fn theory_schedule(inputs: &ScheduleInputs, mode: ScheduleMode) -> Result<ScscSchedule> {
    let ScheduleInputs { mu, lambda, b1, b2, eps0, eps, delta } = *inputs;
    let pos = |v: f64| v > 0.0 && v.is_finite();
    if !pos(mu) || !pos(lambda) || !pos(b1) || !pos(b2) {
        return Err(Error::InvalidSchedule(format!(
            "mu, lambda, B1, B2 must be positive and finite (got {mu}, {lambda}, {b1}, {b2})"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidSchedule(format!("delta = {delta} must lie in (0, 1)")));
    }
    if let ScheduleMode::Practical { scale } = mode {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::InvalidSchedule(format!("practical scale {scale} must lie in (0, 1]")));
        }
    }
    let epochs = epochs_for(eps0, eps)?;
    let delta_tilde = delta / epochs as f64;
    let log_term = (1.0 / delta_tilde).ln();
    let m = mu.min(lambda);
    let r1 = 2.0 * (2.0 * eps0 / m).sqrt();
    let r1_sq = r1 * r1;
    let step_den = 40.0 * (5.0 + 3.0 * log_term);
    let eta_x1 = m * r1_sq / (step_den * b1 * b1);
    let eta_y1 = m * r1_sq / (step_den * b2 * b2);
    let numerator = f64::max(
        320.0 * 320.0 * (b1 + b2).powi(2) * 3.0 * log_term,
        3200.0 * (5.0 + 3.0 * log_term) * (b1 * b1).max(b2 * b2),
    );
    let raw_t1 = numerator / (m * m * r1_sq);
    let scaled = match mode {
        ScheduleMode::Theory => raw_t1,
        ScheduleMode::Practical { scale } => raw_t1 * scale,
    };
    if !(scaled < 2f64.powi(63)) {
        return Err(Error::InvalidSchedule(format!("T1 = {scaled:.3e} overflows")));
    }
    let t1 = (scaled.ceil() as u64).max(1);
    let schedule = ScscSchedule { r1, eta_x1, eta_y1, t1, epochs, delta_tilde, mode };
    schedule.validate()?;
    Ok(schedule)
}

/// Initial duality gap `Gap(x0, y0)` from the problem's best-response oracles.
pub fn estimate_eps0(problem: &SaddleProblem, x0: &[f64], y0: &[f64]) -> Result<f64> {
    Ok(duality_gap(problem, x0, y0)?.gap)
}

/// Result of one epoch: uniform averages of the iterates `t = 0..T-1`.
#[derive(Clone, Debug)]
pub struct EpochOutcome {
    pub x_avg: Point,
    pub y_avg: Point,
    pub iterations: u64,
}

/// One epoch of projected stochastic descent ascent inside
/// `X ∩ B(x_center, radius)` and `Y ∩ B(y_center, radius)`.
#[allow(clippy::too_many_arguments)]
pub fn run_epoch_scsc<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x_center: &Point,
    y_center: &Point,
    eta_x: f64,
    eta_y: f64,
    radius: f64,
    iterations: u64,
    rng: &mut R,
) -> Result<EpochOutcome> {
    run_epoch_scsc_observed(problem, x_center, y_center, eta_x, eta_y, radius, iterations, rng, |_, _| {})
}

/// [`run_epoch_scsc`] with a callback on every iterate `(x_t, y_t)`, `t = 0..=T`.
#[allow(clippy::too_many_arguments)]
pub fn run_epoch_scsc_observed<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x_center: &Point,
    y_center: &Point,
    eta_x: f64,
    eta_y: f64,
    radius: f64,
    iterations: u64,
    rng: &mut R,
    mut on_iterate: impl FnMut(&[f64], &[f64]),
) -> Result<EpochOutcome> {
    if iterations == 0 {
        return Err(Error::InvalidSchedule("an epoch needs at least one iteration".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidSchedule(format!("radius must be positive, got {radius}")));
    }
    problem.check_feasible(x_center, y_center)?;
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut x = x_center.clone();
    let mut y = y_center.clone();
    let mut avg_x = vec![0.0; dx];
    let mut avg_y = vec![0.0; dy];
    let mut gx = vec![0.0; dx];
    let mut gy = vec![0.0; dy];

    for t in 0..iterations {
        on_iterate(&x, &y);
        let w = 1.0 / (t + 1) as f64;
        for (a, v) in avg_x.iter_mut().zip(x.iter()) {
            *a += (v - *a) * w;
        }
        for (a, v) in avg_y.iter_mut().zip(y.iter()) {
            *a += (v - *a) * w;
        }

        problem.sample_subgradients(&x, &y, rng, &mut gx, &mut gy);
        for (v, g) in x.iter_mut().zip(&gx) {
            *v -= eta_x * g;
        }
        for (v, g) in y.iter_mut().zip(&gy) {
            *v += eta_y * g;
        }
        project_intersection_in_place(problem.set_x(), x_center, radius, &mut x)?;
        project_intersection_in_place(problem.set_y(), y_center, radius, &mut y)?;
    }
    on_iterate(&x, &y);

    Ok(EpochOutcome { x_avg: Point::new(avg_x), y_avg: Point::new(avg_y), iterations })
}

/// What the epoch loop reports after each epoch.
#[derive(Clone, Debug)]
pub struct EpochReport<'a> {
    pub params: EpochParams,
    pub x_center: &'a Point,
    pub y_center: &'a Point,
    pub x_avg: &'a Point,
    pub y_avg: &'a Point,
    pub iters_cumulative: u64,
}

#[derive(Clone, Debug)]
pub struct ScscRun {
    pub x: Point,
    pub y: Point,
    pub trace: Trace,
}

/// Epoch-GDA: `K` epochs chained through their averages. The trace has one
/// row per epoch with the duality gap of the epoch average when the problem
/// provides best responses.
pub fn run_epoch_gda_scsc<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x0: &Point,
    y0: &Point,
    schedule: &ScscSchedule,
    rng: &mut R,
) -> Result<ScscRun> {
    run_epoch_gda_scsc_observed(problem, x0, y0, schedule, rng, |_| Ok(()))
}

/// [`run_epoch_gda_scsc`] with a callback after every epoch.
pub fn run_epoch_gda_scsc_observed<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x0: &Point,
    y0: &Point,
    schedule: &ScscSchedule,
    rng: &mut R,
    mut on_epoch: impl FnMut(&EpochReport<'_>) -> Result<()>,
) -> Result<ScscRun> {
    if problem.mu().is_none() {
        return Err(Error::ModeMismatch { expected: "SCSC", actual: problem.curvature().mode_name() });
    }
    schedule.validate()?;
    problem.check_feasible(x0, y0)?;

    let started = Instant::now();
    let mut trace = Trace::new();
    let mut x_center = x0.clone();
    let mut y_center = y0.clone();
    let mut iters = 0u64;

    for params in schedule.epochs() {
        let out = run_epoch_scsc(
            problem,
            &x_center,
            &y_center,
            params.eta_x,
            params.eta_y,
            params.radius,
            params.iterations,
            rng,
        )?;
        iters += out.iterations;
        on_epoch(&EpochReport {
            params,
            x_center: &x_center,
            y_center: &y_center,
            x_avg: &out.x_avg,
            y_avg: &out.y_avg,
            iters_cumulative: iters,
        })?;
        let gap = match duality_gap(problem, &out.x_avg, &out.y_avg) {
            Ok(report) => Some(report.gap),
            Err(Error::OracleUnavailable(_)) => None,
            Err(e) => return Err(e),
        };
        trace.push(TraceRow {
            epoch: params.k,
            iters_cumulative: iters,
            gap,
            near_stationarity: None,
            radius: Some(params.radius),
            eta_x: params.eta_x,
            eta_y: params.eta_y,
            wallclock_ns: started.elapsed().as_nanos() as u64,
            primal_value: None,
        });
        x_center = out.x_avg;
        y_center = out.y_avg;
    }
    Ok(ScscRun { x: x_center, y: y_center, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_quadratic_scsc, NoiseKind};
    use crate::vecspace::ConvexSet;

    fn decoupled(noise: NoiseKind) -> SaddleProblem {
        // f = x^2/2 - y^2/2
        make_quadratic_scsc(
            1,
            1,
            1.0,
            1.0,
            vec![0.0],
            Point::zeros(1),
            Point::zeros(1),
            noise,
            ConvexSet::whole_space(1).unwrap(),
            ConvexSet::whole_space(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn epoch_count_is_log2_ratio() {
        assert_eq!(epochs_for(1.0, 1.0 / 16.0).unwrap(), 4);
        assert_eq!(epochs_for(1.0, 0.1).unwrap(), 4);
        assert_eq!(epochs_for(1.0, 0.5).unwrap(), 1);
        assert!(epochs_for(1.0, 1.0).is_err());
    }

    #[test]
    fn initial_radius() {
        let s = theory_schedule(
            &ScheduleInputs { mu: 1.0, lambda: 1.0, b1: 1.0, b2: 1.0, eps0: 1.0, eps: 1.0 / 16.0, delta: 0.1 },
            ScheduleMode::Theory,
        )
        .unwrap();
        assert!((s.r1 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.epochs, 4);
        assert!((s.delta_tilde - 0.025).abs() < 1e-17);
    }

    #[test]
    fn practical_mode_scales_first_epoch_only() {
        let inputs = ScheduleInputs { mu: 1.0, lambda: 2.0, b1: 3.0, b2: 1.0, eps0: 2.0, eps: 0.01, delta: 0.1 };
        let th = theory_schedule(&inputs, ScheduleMode::Theory).unwrap();
        let pr = theory_schedule(&inputs, ScheduleMode::Practical { scale: 1e-3 }).unwrap();
        assert_eq!((th.r1, th.eta_x1, th.eta_y1, th.epochs), (pr.r1, pr.eta_x1, pr.eta_y1, pr.epochs));
        assert!(pr.t1 < th.t1 / 500);
        assert!(theory_schedule(&inputs, ScheduleMode::Practical { scale: 0.0 }).is_err());
    }

    #[test]
    fn schedule_relations_hold_exactly() {
        let s = ScscSchedule::manual(3.0, 0.1, 0.2, 7, 6).unwrap();
        let e: Vec<EpochParams> = s.epochs().collect();
        assert_eq!(e.len(), 6);
        for w in e.windows(2) {
            assert_eq!(w[1].eta_x, w[0].eta_x / 2.0);
            assert_eq!(w[1].eta_y, w[0].eta_y / 2.0);
            assert_eq!(w[1].radius_sq, w[0].radius_sq / 2.0);
            assert_eq!(w[1].iterations, 2 * w[0].iterations);
            let r = w[0].radius / 2f64.sqrt();
            assert!((w[1].radius - r).abs() <= 2.0 * f64::EPSILON * r);
        }
        assert_eq!(s.total_iterations(), 7 * 63);
    }

    #[test]
    fn total_iterations_geometric_sum() {
        assert_eq!(ScscSchedule::manual(1.0, 1.0, 1.0, 100, 4).unwrap().total_iterations(), 1500);
    }

    #[test]
    fn overflow_is_rejected() {
        assert!(ScscSchedule::manual(1.0, 1.0, 1.0, 1 << 40, 30).is_err());
        assert!(ScscSchedule::manual(1.0, 1.0, 1.0, 1, 63).is_err());
    }

    #[test]
    fn single_iteration_epoch_returns_center() {
        let p = decoupled(NoiseKind::Gaussian { sigma: 10.0 });
        let mut rng = crate::run_rng(3);
        let out =
            run_epoch_scsc(&p, &Point::new(vec![1.0]), &Point::new(vec![-2.0]), 0.5, 0.5, 5.0, 1, &mut rng).unwrap();
        assert_eq!(out.x_avg.as_slice(), &[1.0]);
        assert_eq!(out.y_avg.as_slice(), &[-2.0]);
    }

    #[test]
    fn hand_simulated_epoch() {
        // x_{t+1} = (1 - eta) x_t from x = 1: iterates 1, 1/2, 1/4.
        let p = decoupled(NoiseKind::None);
        let mut rng = crate::run_rng(0);
        let out =
            run_epoch_scsc(&p, &Point::new(vec![1.0]), &Point::new(vec![0.0]), 0.5, 0.5, 100.0, 3, &mut rng).unwrap();
        assert!((out.x_avg[0] - 7.0 / 12.0).abs() < 1e-15);
        assert_eq!(out.y_avg[0], 0.0);
    }

    #[test]
    fn mode_mismatch() {
        let data = crate::problems::PhaseRetrievalData::generate(4, 2, 0.5, 0.0, 1.0, 1);
        let p = crate::problems::make_phase_retrieval_wcsc(4, 2, None, 1.0, 1.0, &data, NoiseKind::None).unwrap();
        let s = ScscSchedule::manual(1.0, 0.1, 0.1, 2, 1).unwrap();
        let (x, y) = p.start();
        let r = run_epoch_gda_scsc(&p, &x, &y, &s, &mut crate::run_rng(0));
        assert!(matches!(r, Err(Error::ModeMismatch { .. })));
    }
}
