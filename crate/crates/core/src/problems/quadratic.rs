use std::sync::Arc;

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use super::{Curvature, NoiseKind, NoiseModel, Objective, Prox, Response, SaddleProblem};
use crate::error::{Error, Result};
use crate::vecspace::{dot, ConvexSet, Point};

/// `f(x, y) = (mu/2)|x|^2 + x^T A y + b^T x - c^T y - (lambda/2)|y|^2`.
///
/// Both best responses are isotropic quadratics, so they are exact
/// projections for every [`ConvexSet`] kind.
#[derive(Clone, Debug)]
pub struct QuadraticSaddle {
    dim_x: usize,
    dim_y: usize,
    mu: f64,
    lambda: f64,
    /// `A`, `dim_x × dim_y`.
    matrix: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl QuadraticSaddle {
    /// `A y`
    fn couple_y(&self, y: &[f64], out: &mut [f64]) {
        let y = DVectorView::from_slice(y, self.dim_y);
        DVectorViewMut::from_slice(out, self.dim_x).gemv(1.0, &self.matrix, &y, 0.0);
    }

    /// `A^T x`
    fn couple_x(&self, x: &[f64], out: &mut [f64]) {
        let x = DVectorView::from_slice(x, self.dim_x);
        DVectorViewMut::from_slice(out, self.dim_y).gemv_tr(1.0, &self.matrix, &x, 0.0);
    }

    /// Largest singular value of `A`.
    fn spectral_norm(&self) -> f64 {
        if self.matrix.iter().all(|a| *a == 0.0) {
            return 0.0;
        }
        self.matrix.singular_values().max()
    }
}

impl Objective for QuadraticSaddle {
    fn dim_x(&self) -> usize {
        self.dim_x
    }

    fn dim_y(&self) -> usize {
        self.dim_y
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut ay = vec![0.0; self.dim_x];
        self.couple_y(y, &mut ay);
        0.5 * self.mu * dot(x, x) + dot(x, &ay) + dot(&self.b, x) - dot(&self.c, y) - 0.5 * self.lambda * dot(y, y)
    }

    fn subgradients(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.couple_y(y, gx);
        for ((g, xi), bi) in gx.iter_mut().zip(x).zip(&self.b) {
            *g += self.mu * xi + bi;
        }
        self.couple_x(x, gy);
        for ((g, yi), ci) in gy.iter_mut().zip(y).zip(&self.c) {
            *g -= ci + self.lambda * yi;
        }
    }

    fn argmin_x(&self, y: &[f64], set_x: &ConvexSet, prox: Option<Prox<'_>>) -> Result<Response> {
        let mut target = vec![0.0; self.dim_x];
        self.couple_y(y, &mut target);
        let (gamma, center) = prox.map_or((0.0, None), |p| (p.gamma, Some(p.center)));
        let m = self.mu + gamma;
        for (i, t) in target.iter_mut().enumerate() {
            let pull = center.map_or(0.0, |c| gamma * c[i]);
            *t = (pull - *t - self.b[i]) / m;
        }
        set_x.project_in_place(&mut target);
        Ok(Response::closed_form(Point::new(target)))
    }

    fn argmax_y(&self, x: &[f64], set_y: &ConvexSet) -> Result<Response> {
        let mut target = vec![0.0; self.dim_y];
        self.couple_x(x, &mut target);
        for (t, ci) in target.iter_mut().zip(&self.c) {
            *t = (*t - ci) / self.lambda;
        }
        set_y.project_in_place(&mut target);
        Ok(Response::closed_form(Point::new(target)))
    }

    /// Unconstrained stationarity: `(m I + A A^T / lambda) x = A c / lambda - b + gamma c_prox`.
    fn closed_form_saddle(
        &self,
        set_x: &ConvexSet,
        set_y: &ConvexSet,
        prox: Option<Prox<'_>>,
    ) -> Option<(Point, Point)> {
        if !matches!(set_x, ConvexSet::WholeSpace { .. }) || !matches!(set_y, ConvexSet::WholeSpace { .. }) {
            return None;
        }
        let (gamma, center) = prox.map_or((0.0, None), |p| (p.gamma, Some(p.center)));
        let a = &self.matrix;
        let mut h = a * a.transpose() / self.lambda;
        for i in 0..self.dim_x {
            h[(i, i)] += self.mu + gamma;
        }
        let c = DVector::from_column_slice(&self.c);
        let mut rhs = a * &c / self.lambda - DVector::from_column_slice(&self.b);
        if let Some(center) = center {
            rhs += DVector::from_column_slice(center) * gamma;
        }
        let x = h.cholesky()?.solve(&rhs);
        let y = (a.transpose() * &x - c) / self.lambda;
        Some((Point::new(x.as_slice().to_vec()), Point::new(y.as_slice().to_vec())))
    }
}

/// Builds the quadratic SCSC testbed.
///
/// `coupling` is row-major `dim_x × dim_y`. Gradient bounds for the noise
/// model use the largest norms of the feasible sets, so the recorded `B1`,
/// `B2`, `M1`, `M2` are infinite when a set is unbounded.
#[allow(clippy::too_many_arguments)]
pub fn make_quadratic_scsc(
    dim_x: usize,
    dim_y: usize,
    mu: f64,
    lambda: f64,
    coupling: Vec<f64>,
    b: Point,
    c: Point,
    noise: NoiseKind,
    set_x: ConvexSet,
    set_y: ConvexSet,
) -> Result<SaddleProblem> {
    if !(mu > 0.0) || !(lambda > 0.0) {
        return Err(Error::InvalidProblem(format!("moduli must be positive, got mu = {mu}, lambda = {lambda}")));
    }
    if dim_x == 0 || dim_y == 0 {
        return Err(Error::InvalidProblem("dimensions must be positive".into()));
    }
    if coupling.len() != dim_x * dim_y {
        return Err(Error::InvalidProblem(format!(
            "coupling has {} entries, expected {}",
            coupling.len(),
            dim_x * dim_y
        )));
    }
    if b.dim() != dim_x || c.dim() != dim_y {
        return Err(Error::InvalidProblem("linear terms have wrong dimension".into()));
    }
    let objective = QuadraticSaddle {
        dim_x,
        dim_y,
        mu,
        lambda,
        matrix: DMatrix::from_row_slice(dim_x, dim_y, &coupling),
        b: b.into_vec(),
        c: c.into_vec(),
    };
    let rx = set_x.max_norm();
    let ry = set_y.max_norm();
    let a_norm = objective.spectral_norm();
    let gx = mu * rx + a_norm * ry + crate::vecspace::norm(&objective.b);
    let gy = a_norm * rx + crate::vecspace::norm(&objective.c) + lambda * ry;
    let noise = NoiseModel::with_gradient_bounds(noise, gx, gy, dim_x, dim_y);
    SaddleProblem::new(
        "quadratic",
        Arc::new(objective),
        set_x,
        set_y,
        Curvature::StronglyConvex { mu },
        lambda,
        noise,
        (Point::zeros(dim_x), Point::zeros(dim_y)),
    )
}
