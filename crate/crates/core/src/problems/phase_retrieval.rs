use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Curvature, NoiseKind, NoiseModel, Objective, Response, SaddleProblem};
use crate::error::{Error, Result};
use crate::vecspace::{dot, norm, ConvexSet, Point};

/// Measurements `b_i ≈ <a_i, x_true>^2`.
#[derive(Clone, Debug)]
pub struct PhaseRetrievalData {
    /// Row-major `n × d`.
    pub sensing: Vec<f64>,
    pub measurements: Vec<f64>,
    /// Suggested initial point, uniform in the box.
    pub start: Vec<f64>,
}

impl PhaseRetrievalData {
    /// `a_i ~ N(0, I/d)`, `x_true` uniform on the sphere of radius `signal_norm`,
    /// measurements corrupted by `N(0, noise^2)` and clipped at zero.
    pub fn generate(n: usize, d: usize, signal_norm: f64, noise: f64, box_radius: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (d as f64).sqrt();
        let mut truth: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let nt = norm(&truth).max(f64::MIN_POSITIVE);
        truth.iter_mut().for_each(|v| *v *= signal_norm / nt);
        let mut sensing = Vec::with_capacity(n * d);
        let mut measurements = Vec::with_capacity(n);
        for _ in 0..n {
            let a: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
            let e: f64 = rng.sample::<f64, _>(StandardNormal);
            measurements.push((dot(&a, &truth).powi(2) + noise * e).max(0.0));
            sensing.extend(a);
        }
        let start = (0..d).map(|_| rng.random_range(-box_radius..=box_radius)).collect();
        PhaseRetrievalData { sensing, measurements, start }
    }
}

/// `f(x, y) = sum_i y_i |<a_i, x>^2 - b_i| - (lambda/2)|y|^2`.
///
/// Each term is `2|a_i|^2`-weakly convex in `x`; with `y` in the box
/// `[0, 1/n]^n` the weights sum to at most one.
#[derive(Clone, Debug)]
pub struct PhaseRetrievalSaddle {
    n: usize,
    d: usize,
    lambda: f64,
    sensing: Vec<f64>,
    measurements: Vec<f64>,
}

impl PhaseRetrievalSaddle {
    fn row(&self, i: usize) -> &[f64] {
        &self.sensing[i * self.d..(i + 1) * self.d]
    }

    /// Residuals `<a_i, x>^2 - b_i` and inner products `<a_i, x>`.
    fn residuals(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let inner: Vec<f64> = (0..self.n).map(|i| dot(self.row(i), x)).collect();
        let res = inner.iter().zip(&self.measurements).map(|(p, b)| p * p - b).collect();
        (res, inner)
    }
}

impl Objective for PhaseRetrievalSaddle {
    fn dim_x(&self) -> usize {
        self.d
    }

    fn dim_y(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let (res, _) = self.residuals(x);
        res.iter().zip(y).map(|(r, w)| w * r.abs()).sum::<f64>() - 0.5 * self.lambda * dot(y, y)
    }

    fn subgradients(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let (res, inner) = self.residuals(x);
        gx.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..self.n {
            // sign(0) = 0 is a valid choice in [-1, 1].
            let s = if res[i] > 0.0 {
                1.0
            } else if res[i] < 0.0 {
                -1.0
            } else {
                0.0
            };
            let coef = y[i] * s * 2.0 * inner[i];
            if coef != 0.0 {
                for (g, a) in gx.iter_mut().zip(self.row(i)) {
                    *g += coef * a;
                }
            }
            gy[i] = res[i].abs() - self.lambda * y[i];
        }
    }

    fn argmax_y(&self, x: &[f64], set_y: &ConvexSet) -> Result<Response> {
        let (res, _) = self.residuals(x);
        let mut target: Vec<f64> = res.iter().map(|r| r.abs() / self.lambda).collect();
        set_y.project_in_place(&mut target);
        Ok(Response::closed_form(Point::new(target)))
    }
}

/// Builds the phase-retrieval WCSC testbed on `x in [-box_radius, box_radius]^d`,
/// `y in [0, 1/n]^n`.
///
/// `rho_estimate`, when given, overrides the analytic modulus `2 max_i |a_i|^2`
/// (it must not be smaller).
pub fn make_phase_retrieval_wcsc(
    n_terms: usize,
    dim_x: usize,
    rho_estimate: Option<f64>,
    lambda: f64,
    box_radius: f64,
    data: &PhaseRetrievalData,
    noise: NoiseKind,
) -> Result<SaddleProblem> {
    if n_terms == 0 || dim_x == 0 || data.measurements.is_empty() {
        return Err(Error::InvalidProblem("phase retrieval needs data".into()));
    }
    if data.sensing.len() != n_terms * dim_x || data.measurements.len() != n_terms || data.start.len() != dim_x {
        return Err(Error::InvalidProblem("phase retrieval data does not match n_terms × dim_x".into()));
    }
    if !(lambda > 0.0) || !(box_radius > 0.0) {
        return Err(Error::InvalidProblem("lambda and box radius must be positive".into()));
    }
    let a_max_sq = data.sensing.chunks(dim_x).map(|r| dot(r, r)).fold(0.0, f64::max);
    let analytic = 2.0 * a_max_sq;
    let rho = match rho_estimate {
        Some(r) if r < analytic => {
            return Err(Error::InvalidProblem(format!("rho estimate {r} is below the analytic bound {analytic}")))
        }
        Some(r) => r,
        None => analytic,
    };
    let objective = PhaseRetrievalSaddle {
        n: n_terms,
        d: dim_x,
        lambda,
        sensing: data.sensing.clone(),
        measurements: data.measurements.clone(),
    };
    let set_x = ConvexSet::cube(dim_x, box_radius)?;
    let y_cap = 1.0 / n_terms as f64;
    let set_y = ConvexSet::boxed(Point::zeros(n_terms), Point::filled(n_terms, y_cap))?;
    let rx = set_x.max_norm();
    let b_max = data.measurements.iter().cloned().fold(0.0, f64::max);
    let gx = analytic * rx;
    let gy = (n_terms as f64).sqrt() * (a_max_sq * rx * rx + b_max) + lambda * set_y.max_norm();
    let noise = NoiseModel::with_gradient_bounds(noise, gx, gy, dim_x, n_terms);
    SaddleProblem::new(
        "phase_retrieval",
        Arc::new(objective),
        set_x,
        set_y,
        Curvature::WeaklyConvex { rho },
        lambda,
        noise,
        (Point::new(data.start.clone()), Point::zeros(n_terms)),
    )
}
