//! Epoch-GDA for weakly-convex strongly-concave problems.
//!
//! Epoch `k` runs stochastic descent ascent on the surrogate
//! `f(x, y) + (gamma/2)|x - x0^k|^2`, which is strongly convex in `x` once
//! `gamma > rho`. The x-update is a closed-form proximal step on that
//! surrogate. Both variables restart from the epoch averages and the output is
//! the starting point of a uniformly drawn epoch.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::near_stationarity;
use crate::problems::SaddleProblem;
use crate::trace::{Trace, TraceRow};
use crate::vecspace::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WcscConfig {
    /// Proximal weight; `2 rho` by default.
    pub gamma: f64,
    pub rho: f64,
    pub lambda: f64,
    /// Number of epochs `K`.
    pub epochs: usize,
}

impl WcscConfig {
    pub fn new(rho: f64, lambda: f64, epochs: usize) -> Result<Self> {
        Self::with_gamma(2.0 * rho, rho, lambda, epochs)
    }

    pub fn with_gamma(gamma: f64, rho: f64, lambda: f64, epochs: usize) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite() && lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidSchedule(format!("rho = {rho}, lambda = {lambda} must be positive")));
        }
        if !(gamma > rho && gamma.is_finite()) {
            return Err(Error::InvalidSchedule(format!("gamma = {gamma} must exceed rho = {rho}")));
        }
        if epochs == 0 {
            return Err(Error::InvalidSchedule("K must be at least 1".into()));
        }
        Ok(WcscConfig { gamma, rho, lambda, epochs })
    }

    /// Default configuration for a WCSC problem.
    pub fn for_problem(problem: &SaddleProblem, epochs: usize) -> Result<Self> {
        let rho = problem.rho().ok_or(Error::ModeMismatch { expected: "WCSC", actual: "SCSC" })?;
        Self::new(rho, problem.lambda(), epochs)
    }

    /// `sum_{k=1..K} T_k`.
    pub fn total_iterations(&self) -> u64 {
        (1..=self.epochs).map(epoch_length).sum()
    }
}

/// Length and step sizes of one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WcscEpoch {
    pub k: usize,
    pub iterations: u64,
    pub eta_x: f64,
    pub eta_y: f64,
}

/// `T_k = ceil(106 (k+1) / 3)`.
pub fn epoch_length(k: usize) -> u64 {
    (106 * (k as u64 + 1)).div_ceil(3)
}

/// Epoch `k` (1-based): `T_k = ceil(106(k+1)/3)`, `η_x = 4/(rho(k+1))`,
/// `η_y = 2/(lambda(k+1))`.
pub fn wcsc_stepsizes(k: usize, rho: f64, lambda: f64) -> Result<WcscEpoch> {
    if k < 1 {
        return Err(Error::InvalidSchedule("epochs are numbered from 1".into()));
    }
    if !(rho > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidSchedule(format!("rho = {rho}, lambda = {lambda} must be positive")));
    }
    let k1 = (k + 1) as f64;
    Ok(WcscEpoch { k, iterations: epoch_length(k), eta_x: 4.0 / (rho * k1), eta_y: 2.0 / (lambda * k1) })
}

/// `argmin_{x in X} <g, x> + |x - x_t|^2 / (2 eta) + (gamma/2) |x - x_center|^2`.
///
/// The minimizer is the projection onto `X` of the unconstrained minimizer
/// `(x_t/eta + gamma x_center - g) / (1/eta + gamma)`, since the objective is
/// an isotropic quadratic.
pub fn prox_step_x(
    g: &[f64],
    x_t: &[f64],
    x_center: &[f64],
    eta: f64,
    gamma: f64,
    set_x: &crate::vecspace::ConvexSet,
) -> Result<Point> {
    let d = set_x.dim();
    for len in [g.len(), x_t.len(), x_center.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, got: len });
        }
    }
    let mut out = x_t.to_vec();
    prox_step_in_place(&mut out, g, x_center, eta, gamma, set_x);
    Ok(Point::new(out))
}

fn prox_step_in_place(
    x: &mut [f64],
    g: &[f64],
    x_center: &[f64],
    eta: f64,
    gamma: f64,
    set_x: &crate::vecspace::ConvexSet,
) {
    let inv = 1.0 / eta;
    let denom = inv + gamma;
    for ((xi, gi), ci) in x.iter_mut().zip(g).zip(x_center) {
        *xi = (inv * *xi + gamma * ci - gi) / denom;
    }
    set_x.project_in_place(x);
}

/// Saddle point of `f(x, y) + (gamma/2)|x - x_center|^2` over `X × Y`.
pub fn regularized_saddle(problem: &SaddleProblem, x_center: &Point, gamma: f64) -> Result<(Point, Point)> {
    if let Some(rho) = problem.rho() {
        if !(gamma > rho) {
            return Err(Error::InvalidProblem(format!("gamma = {gamma} must exceed rho = {rho}")));
        }
    }
    let reg = problem.regularized(x_center, gamma)?;
    let (x, y, _) = reg.saddle_from(x_center)?;
    Ok((x, y))
}

#[derive(Clone, Debug)]
pub struct WcscRun {
    /// `x0^tau`.
    pub x: Point,
    /// Index of the returned epoch start, uniform on `1..=K`.
    pub tau: usize,
    /// `x0^1, ..., x0^{K+1}`.
    pub centers: Vec<Point>,
    pub trace: Trace,
}

/// Runs `K` epochs. Row `k` of the trace describes `x0^k`, the point the
/// output is drawn from, with `near_stationarity = gamma |x0^k - x̂*_k|`
/// whenever the regularized saddle `x̂*_k` can be computed.
pub fn run_epoch_gda_wcsc<R: Rng + ?Sized>(
    problem: &SaddleProblem,
    x0: &Point,
    y0: &Point,
    config: &WcscConfig,
    rng: &mut R,
) -> Result<WcscRun> {
    let rho = problem.rho().ok_or(Error::ModeMismatch { expected: "WCSC", actual: "SCSC" })?;
    if config.gamma <= rho {
        return Err(Error::InvalidSchedule(format!("gamma = {} must exceed rho = {rho}", config.gamma)));
    }
    problem.check_feasible(x0, y0)?;

    let started = Instant::now();
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let set_x = problem.set_x();
    let set_y = problem.set_y();
    let gamma = config.gamma;

    let mut trace = Trace::new();
    let mut centers = vec![x0.clone()];
    let mut x_center = x0.clone();
    let mut y_center = y0.clone();
    let mut iters = 0u64;
    let mut gx = vec![0.0; dx];
    let mut gy = vec![0.0; dy];

    for k in 1..=config.epochs {
        let epoch = wcsc_stepsizes(k, config.rho, config.lambda)?;
        let measure = match near_stationarity(problem, &x_center, gamma) {
            Ok((_, m)) => Some(m),
            Err(Error::OracleUnavailable(_)) => None,
            Err(e) => return Err(e),
        };
        let primal = problem.primal_value(&x_center).ok();

        let mut x = x_center.clone();
        let mut y = y_center.clone();
        let mut avg_x = vec![0.0; dx];
        let mut avg_y = vec![0.0; dy];
        for t in 0..epoch.iterations {
            let w = 1.0 / (t + 1) as f64;
            for (a, v) in avg_x.iter_mut().zip(x.iter()) {
                *a += (v - *a) * w;
            }
            for (a, v) in avg_y.iter_mut().zip(y.iter()) {
                *a += (v - *a) * w;
            }
            problem.sample_subgradients(&x, &y, rng, &mut gx, &mut gy);
            prox_step_in_place(&mut x, &gx, &x_center, epoch.eta_x, gamma, set_x);
            for (v, g) in y.iter_mut().zip(&gy) {
                *v += epoch.eta_y * g;
            }
            set_y.project_in_place(&mut y);
        }
        iters += epoch.iterations;

        trace.push(TraceRow {
            epoch: k,
            iters_cumulative: iters,
            gap: None,
            near_stationarity: measure,
            radius: None,
            eta_x: epoch.eta_x,
            eta_y: epoch.eta_y,
            wallclock_ns: started.elapsed().as_nanos() as u64,
            primal_value: primal,
        });
        x_center = Point::new(avg_x);
        y_center = Point::new(avg_y);
        centers.push(x_center.clone());
    }

    let tau = rng.random_range(1..=config.epochs);
    Ok(WcscRun { x: centers[tau - 1].clone(), tau, centers, trace })
}
