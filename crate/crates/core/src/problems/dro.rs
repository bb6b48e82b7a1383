use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Curvature, NoiseKind, NoiseModel, Objective, Prox, Response, ResponseMethod, SaddleProblem};
use crate::error::{Error, Result};
use crate::vecspace::{dot, ConvexSet, Point, FEAS_TOL};

/// Labelled examples for the hinge losses `l_i(x) = max(0, 1 - b_i a_i^T x)`.
#[derive(Clone, Debug)]
pub struct DroData {
    /// Row-major `n × d`.
    pub features: Vec<f64>,
    /// Labels in `{-1, +1}`.
    pub labels: Vec<f64>,
}

impl DroData {
    /// Gaussian features, labels from a random linear separator with 10% flips.
    pub fn generate(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut features = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let a: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let flip: f64 = rand::Rng::random(&mut rng);
            let mut label = if dot(&a, &w) >= 0.0 { 1.0 } else { -1.0 };
            if flip < 0.1 {
                label = -label;
            }
            features.extend(a);
            labels.push(label);
        }
        DroData { features, labels }
    }
}

/// `f(x, y) = sum_i y_i l_i(x) + (mu/2)|x|^2 - (lambda/2)|y - 1/n|^2`, `y` on the simplex.
#[derive(Clone, Debug)]
pub struct DroSaddle {
    n: usize,
    d: usize,
    mu: f64,
    lambda: f64,
    features: Vec<f64>,
    labels: Vec<f64>,
    row_norm_sq: Vec<f64>,
}

const DUAL_GAP_TARGET: f64 = 1e-14;
const DUAL_GAP_ACCEPT: f64 = 1e-10;
const MAX_SWEEPS: usize = 200_000;

impl DroSaddle {
    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    fn margin(&self, i: usize, x: &[f64]) -> f64 {
        self.labels[i] * dot(self.row(i), x)
    }

    fn losses(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (1.0 - self.margin(i, x)).max(0.0)).collect()
    }

    /// Minimizes `sum_i w_i l_i(x) + (m/2)|x - s|^2` by dual coordinate ascent.
    ///
    /// The dual is `max_{0 <= a <= w} sum_i a_i (1 - b_i a_i^T s) - |sum_i a_i b_i a_i|^2 / (2m)`
    /// with `x(a) = s + (1/m) sum_i a_i b_i a_i`; the primal-dual gap certifies
    /// suboptimality.
    fn weighted_hinge_min(&self, weights: &[f64], m: f64, shift: &[f64]) -> (Vec<f64>, f64) {
        let mut alpha = vec![0.0; self.n];
        let mut x = shift.to_vec();
        let mut gap = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..MAX_SWEEPS {
            for i in 0..self.n {
                if self.row_norm_sq[i] == 0.0 {
                    continue;
                }
                let grad = 1.0 - self.margin(i, &x);
                let next = (alpha[i] + m * grad / self.row_norm_sq[i]).clamp(0.0, weights[i]);
                let delta = next - alpha[i];
                if delta != 0.0 {
                    let s = delta * self.labels[i] / m;
                    for (xj, aj) in x.iter_mut().zip(self.row(i)) {
                        *xj += s * aj;
                    }
                    alpha[i] = next;
                }
            }
            let primal: f64 = self.losses(&x).iter().zip(weights).map(|(l, w)| l * w).sum::<f64>()
                + 0.5 * m * crate::vecspace::dist_sq(&x, shift);
            let dual: f64 = alpha.iter().enumerate().map(|(i, a)| a * (1.0 - self.margin(i, shift))).sum::<f64>()
                - 0.5 * m * crate::vecspace::dist_sq(&x, shift);
            let next_gap = (primal - dual).max(0.0);
            stalled = if next_gap >= 0.999 * gap { stalled + 1 } else { 0 };
            gap = next_gap;
            if gap <= DUAL_GAP_TARGET * primal.abs().max(1.0) || (stalled >= 20 && gap <= DUAL_GAP_ACCEPT) {
                break;
            }
        }
        (x, gap)
    }
}

impl Objective for DroSaddle {
    fn dim_x(&self) -> usize {
        self.d
    }

    fn dim_y(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let u = 1.0 / self.n as f64;
        let loss: f64 = self.losses(x).iter().zip(y).map(|(l, w)| l * w).sum();
        let dev: f64 = y.iter().map(|v| (v - u) * (v - u)).sum();
        loss + 0.5 * self.mu * dot(x, x) - 0.5 * self.lambda * dev
    }

    fn subgradients(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let u = 1.0 / self.n as f64;
        for (g, xi) in gx.iter_mut().zip(x) {
            *g = self.mu * xi;
        }
        for i in 0..self.n {
            let loss = 1.0 - self.margin(i, x);
            if loss > 0.0 {
                let s = -y[i] * self.labels[i];
                for (g, a) in gx.iter_mut().zip(self.row(i)) {
                    *g += s * a;
                }
            }
            gy[i] = loss.max(0.0) - self.lambda * (y[i] - u);
        }
    }

    fn argmin_x(&self, y: &[f64], set_x: &ConvexSet, prox: Option<Prox<'_>>) -> Result<Response> {
        let (gamma, center) = prox.map_or((0.0, None), |p| (p.gamma, Some(p.center)));
        let m = self.mu + gamma;
        let shift: Vec<f64> = match center {
            Some(c) => c.iter().map(|ci| gamma * ci / m).collect(),
            None => vec![0.0; self.d],
        };
        let (x, gap) = self.weighted_hinge_min(y, m, &shift);
        if gap > DUAL_GAP_ACCEPT {
            return Err(Error::InnerSolve { what: "DRO best response in x", achieved: gap });
        }
        // The feasible ball is sized to contain every unconstrained minimizer.
        if !set_x.contains(&x, FEAS_TOL) {
            return Err(Error::InnerSolve {
                what: "DRO best response left the feasible set",
                achieved: set_x.distance(&x),
            });
        }
        // Distance bound from strong convexity: |x - x*|^2 <= 2 gap / m.
        let achieved_tol = (2.0 * gap / m).sqrt();
        Ok(Response { point: Point::new(x), method: ResponseMethod::InnerSolve { achieved_tol } })
    }

    fn argmax_y(&self, x: &[f64], set_y: &ConvexSet) -> Result<Response> {
        let u = 1.0 / self.n as f64;
        let mut target: Vec<f64> = self.losses(x).iter().map(|l| u + l / self.lambda).collect();
        set_y.project_in_place(&mut target);
        Ok(Response::closed_form(Point::new(target)))
    }
}

/// Builds the DRO testbed with `y` on the probability simplex and `x` in the
/// ball `|x| <= max_i |a_i| / mu`, which contains every best response.
pub fn make_dro_scsc(
    n_losses: usize,
    dim_x: usize,
    mu: f64,
    lambda: f64,
    data: &DroData,
    noise: NoiseKind,
) -> Result<SaddleProblem> {
    if n_losses < 1 {
        return Err(Error::InvalidProblem("DRO needs at least one loss".into()));
    }
    if dim_x < 1 {
        return Err(Error::InvalidProblem("DRO needs dim_x >= 1".into()));
    }
    if !(mu > 0.0) || !(lambda > 0.0) {
        return Err(Error::InvalidProblem(format!("moduli must be positive, got mu = {mu}, lambda = {lambda}")));
    }
    if data.features.len() != n_losses * dim_x || data.labels.len() != n_losses {
        return Err(Error::InvalidProblem("DRO data does not match n_losses × dim_x".into()));
    }
    let row_norm_sq: Vec<f64> = data.features.chunks(dim_x).map(|r| dot(r, r)).collect();
    let a_max = row_norm_sq.iter().cloned().fold(0.0, f64::max).sqrt();
    let radius = (a_max / mu).max(1e-12);
    let objective = DroSaddle {
        n: n_losses,
        d: dim_x,
        mu,
        lambda,
        features: data.features.clone(),
        labels: data.labels.clone(),
        row_norm_sq,
    };
    let set_x = ConvexSet::ball(Point::zeros(dim_x), radius)?;
    let set_y = ConvexSet::simplex(n_losses)?;
    let gx = a_max + mu * radius;
    let loss_max = 1.0 + a_max * radius;
    let gy = (n_losses as f64).sqrt() * loss_max + lambda * 2f64.sqrt();
    let noise = NoiseModel::with_gradient_bounds(noise, gx, gy, dim_x, n_losses);
    SaddleProblem::new(
        "dro",
        Arc::new(objective),
        set_x,
        set_y,
        Curvature::StronglyConvex { mu },
        lambda,
        noise,
        (Point::zeros(dim_x), Point::filled(n_losses, 1.0 / n_losses as f64)),
    )
}
