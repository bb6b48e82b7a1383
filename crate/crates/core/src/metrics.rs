//! Convergence measures: duality gap, regularized gap, near-stationarity,
//! the distance-gap residual, and log-log rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{ResponseMethod, SaddleProblem};
use crate::vecspace::{ConvexSet, Point};

/// Gaps in `[-GAP_CLAMP, 0)` are rounding noise and reported as zero.
pub const GAP_CLAMP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct GapReport {
    pub gap: f64,
    /// `x̂(y)`
    pub best_response_x: Point,
    /// `ŷ(x)`
    pub best_response_y: Point,
    pub method: ResponseMethod,
}

/// `Gap(x, y) = f(x, ŷ(x)) - f(x̂(y), y)`.
pub fn duality_gap(problem: &SaddleProblem, x: &[f64], y: &[f64]) -> Result<GapReport> {
    problem.check_feasible(x, y)?;
    let by = problem.best_response_y(x)?;
    let bx = problem.best_response_x(y)?;
    let raw = problem.value(x, &by.point) - problem.value(&bx.point, y);
    let gap = if raw >= 0.0 {
        raw
    } else if raw >= -GAP_CLAMP {
        0.0
    } else {
        return Err(Error::NegativeGap(raw));
    };
    Ok(GapReport { gap, best_response_x: bx.point, best_response_y: by.point, method: bx.method.combine(by.method) })
}

/// Duality gap of `f(x, y) + (gamma/2)|x - center|^2`.
pub fn regularized_gap(
    problem: &SaddleProblem,
    x_center: &Point,
    gamma: f64,
    x: &[f64],
    y: &[f64],
) -> Result<GapReport> {
    duality_gap(&problem.regularized(x_center, gamma)?, x, y)
}

/// Proximal point `z` of the primal function around `x_tilde` and the
/// measure `gamma |x_tilde - z|`, which bounds `dist(0, ∂P(z))`.
pub fn near_stationarity(problem: &SaddleProblem, x_tilde: &Point, gamma: f64) -> Result<(Point, f64)> {
    let (z, _) = crate::wcsc::regularized_saddle(problem, x_tilde, gamma)?;
    let measure = gamma * x_tilde.dist(&z);
    Ok((z, measure))
}

/// `dist(0, ∇P(z) + N_X(z))` for box or unconstrained `X`, where `P` is the
/// primal function (differentiable on the testbeds that use this).
pub fn stationarity_residual(problem: &SaddleProblem, z: &[f64]) -> Result<f64> {
    let mut g = vec![0.0; problem.dim_x()];
    problem.primal_gradient(z, &mut g)?;
    let tol = 1e-12;
    let sq: f64 = match problem.set_x() {
        ConvexSet::WholeSpace { .. } => g.iter().map(|v| v * v).sum(),
        ConvexSet::Box { lower, upper } => g
            .iter()
            .zip(z)
            .zip(lower.iter().zip(upper.iter()))
            .map(|((gi, zi), (l, u))| {
                // The normal cone at an active bound absorbs the outward part.
                let at_lower = *zi <= l + tol;
                let at_upper = *zi >= u - tol;
                let r = match (at_lower, at_upper) {
                    (true, true) => 0.0,
                    (true, false) => gi.min(0.0),
                    (false, true) => gi.max(0.0),
                    (false, false) => *gi,
                };
                r * r
            })
            .sum(),
        _ => return Err(Error::OracleUnavailable("stationarity residual needs a box or the whole space")),
    };
    Ok(sq.sqrt())
}

/// Right-hand side minus left-hand side of the key inequality
///
/// `(mu/4)|x̂(y1) - x0|^2 + (lambda/4)|ŷ(x1) - y0|^2 <= Gap(x0, y0) + Gap(x1, y1)`,
///
/// which holds for every feasible pair on an SCSC problem.
pub fn key_lemma_residual(problem: &SaddleProblem, pair0: (&[f64], &[f64]), pair1: (&[f64], &[f64])) -> Result<f64> {
    let mu = problem.mu().ok_or(Error::ModeMismatch { expected: "SCSC", actual: "WCSC" })?;
    let g0 = duality_gap(problem, pair0.0, pair0.1)?;
    let g1 = duality_gap(problem, pair1.0, pair1.1)?;
    let lhs = 0.25 * mu * g1.best_response_x.dist_sq(&Point::from(pair0.0))
        + 0.25 * problem.lambda() * g1.best_response_y.dist_sq(&Point::from(pair0.1));
    Ok(g0.gap + g1.gap - lhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ln value` on `ln budget`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::InvalidFit(format!("got {} points", points.len())));
    }
    if let Some(bad) = points.iter().find(|(b, v)| !(*b > 0.0 && *v > 0.0 && b.is_finite() && v.is_finite())) {
        return Err(Error::InvalidFit(format!("nonpositive point {bad:?}")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|(b, v)| (b.ln(), v.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("all budgets are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LogLogFit { slope, intercept, r2 })
}
