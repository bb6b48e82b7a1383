//! Averaged primal-dual stochastic gradient descent ascent, the single-loop
//! reference method.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::duality_gap;
use crate::problems::SaddleProblem;
use crate::trace::{Trace, TraceRow};
use crate::vecspace::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// `eta_t = c`.
    Constant { c: f64 },
    /// `eta_t = c / sqrt(t + 1)`.
    InvSqrt { c: f64 },
}

impl StepRule {
    /// `c / sqrt(t+1)` with `c = 1 / min(mu, lambda)`.
    pub fn default_for(problem: &SaddleProblem) -> Result<Self> {
        let mu = problem.mu().ok_or(Error::ModeMismatch { expected: "SCSC", actual: "WCSC" })?;
        Ok(StepRule::InvSqrt { c: 1.0 / mu.min(problem.lambda()) })
    }

    pub fn eta(&self, t: u64) -> f64 {
        match *self {
            StepRule::Constant { c } => c,
            StepRule::InvSqrt { c } => c / ((t + 1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let c = match *self {
            StepRule::Constant { c } | StepRule::InvSqrt { c } => c,
        };
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidSchedule(format!("step constant must be positive, got {c}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PdsgdRun {
    pub x: Point,
    pub y: Point,
    pub trace: Trace,
}

/// Checkpoints at powers of two below `iterations`, and at `iterations`.
pub fn power_of_two_checkpoints(iterations: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|i| 1u64 << i).take_while(|&c| c < iterations).collect();
    out.push(iterations);
    out
}

/// Runs `iterations` steps with power-of-two gap checkpoints.
pub fn run_pdsgd<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x0: &Point,
    y0: &Point,
    iterations: u64,
    rule: StepRule,
    rng: &mut R,
) -> Result<PdsgdRun> {
    run_pdsgd_with_checkpoints(problem, x0, y0, &power_of_two_checkpoints(iterations), rule, rng)
}

/// Runs until the largest checkpoint. At each checkpoint `c` the trace records
/// the duality gap of the average of `(x_t, y_t)` over `t = 0..c-1`.
pub fn run_pdsgd_with_checkpoints<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x0: &Point,
    y0: &Point,
    checkpoints: &[u64],
    rule: StepRule,
    rng: &mut R,
) -> Result<PdsgdRun> {
    rule.validate()?;
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSchedule("checkpoints must be positive and strictly increasing".into()));
    }
    problem.check_feasible(x0, y0)?;

    let started = Instant::now();
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut avg_x = vec![0.0; dx];
    let mut avg_y = vec![0.0; dy];
    let mut gx = vec![0.0; dx];
    let mut gy = vec![0.0; dy];
    let mut trace = Trace::new();
    let mut next = 0;
    let last = *checkpoints.last().expect("nonempty");

    for t in 0..last {
        let w = 1.0 / (t + 1) as f64;
        for (a, v) in avg_x.iter_mut().zip(&x) {
            *a += (v - *a) * w;
        }
        for (a, v) in avg_y.iter_mut().zip(&y) {
            *a += (v - *a) * w;
        }
        let eta = rule.eta(t);
        problem.sample_subgradients(&x, &y, rng, &mut gx, &mut gy);
        for (v, g) in x.iter_mut().zip(&gx) {
            *v -= eta * g;
        }
        for (v, g) in y.iter_mut().zip(&gy) {
            *v += eta * g;
        }
        problem.set_x().project_in_place(&mut x);
        problem.set_y().project_in_place(&mut y);

        if t + 1 == checkpoints[next] {
            let gap = match duality_gap(problem, &avg_x, &avg_y) {
                Ok(r) => Some(r.gap),
                Err(Error::OracleUnavailable(_)) => None,
                Err(e) => return Err(e),
            };
            next += 1;
            trace.push(TraceRow {
                epoch: next,
                iters_cumulative: t + 1,
                gap,
                near_stationarity: None,
                radius: None,
                eta_x: eta,
                eta_y: eta,
                wallclock_ns: started.elapsed().as_nanos() as u64,
                primal_value: None,
            });
        }
    }
    Ok(PdsgdRun { x: Point::new(avg_x), y: Point::new(avg_y), trace })
}
