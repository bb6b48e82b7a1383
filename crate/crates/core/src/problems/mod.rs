//! Saddle problems and the synthetic testbeds used to exercise the solvers.
//!
//! A [`SaddleProblem`] bundles an [`Objective`] (deterministic value,
//! subgradients and whatever best-response oracles the objective can offer)
//! with the feasible sets, the curvature moduli and a [`NoiseModel`] that
//! turns deterministic subgradients into stochastic ones.
//!
//! Regularized problems `f(x, y) + (gamma/2)|x - c|^2` are obtained with
//! [`SaddleProblem::regularized`]; every oracle accounts for the extra term.

mod dro;
mod inner;
mod phase_retrieval;
mod quadratic;
mod testbed;

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecspace::{ConvexSet, Point, FEAS_TOL};

pub use dro::{make_dro_scsc, DroData, DroSaddle};
pub use inner::{minimize_smooth, SmoothSolve, INNER_TOL};
pub use phase_retrieval::{make_phase_retrieval_wcsc, PhaseRetrievalData, PhaseRetrievalSaddle};
pub use quadratic::{make_quadratic_scsc, QuadraticSaddle};
pub use testbed::{Coupling, QuadraticStart, TestbedSpec};

/// Curvature of the objective in the minimization variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Curvature {
    /// `mu`-strongly convex in `x`.
    StronglyConvex { mu: f64 },
    /// `rho`-weakly convex in `x`: `f + (rho/2)|x|^2` is convex.
    WeaklyConvex { rho: f64 },
}

impl Curvature {
    pub fn mode_name(&self) -> &'static str {
        match self {
            Curvature::StronglyConvex { .. } => "SCSC",
            Curvature::WeaklyConvex { .. } => "WCSC",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Gaussian { sigma: f64 },
}

/// Additive i.i.d. Gaussian noise on the deterministic subgradients, with
/// the moment bounds it certifies.
///
/// `b1`, `b2` are the sub-Gaussian scales (`E exp(|G|^2 / B^2) <= e`) and
/// `m1`, `m2` the second-moment bounds (`E |G|^2 <= M^2`), for the x and y
/// oracles respectively.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub b1: f64,
    pub b2: f64,
    pub m1: f64,
    pub m2: f64,
}

impl NoiseModel {
    /// Bounds from `B^2 = 2 (G_max^2 + sigma^2 d)` and `M^2 = G_max^2 + sigma^2 d`,
    /// where `G_max` bounds the deterministic subgradient over the feasible sets.
    pub fn with_gradient_bounds(kind: NoiseKind, gx_max: f64, gy_max: f64, dim_x: usize, dim_y: usize) -> Self {
        let var = match kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian { sigma } => sigma * sigma,
        };
        let mx2 = gx_max * gx_max + var * dim_x as f64;
        let my2 = gy_max * gy_max + var * dim_y as f64;
        NoiseModel { kind, b1: (2.0 * mx2).sqrt(), b2: (2.0 * my2).sqrt(), m1: mx2.sqrt(), m2: my2.sqrt() }
    }

    pub fn sigma(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Gaussian { sigma } => sigma,
        }
    }
}

/// `(gamma/2) |x - center|^2` added to the objective.
#[derive(Clone, Copy, Debug)]
pub struct Prox<'a> {
    pub center: &'a [f64],
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ResponseMethod {
    ClosedForm,
    InnerSolve { achieved_tol: f64 },
}

impl ResponseMethod {
    /// The less exact of two methods.
    pub fn combine(self, other: ResponseMethod) -> ResponseMethod {
        match (self, other) {
            (ResponseMethod::ClosedForm, m) | (m, ResponseMethod::ClosedForm) => m,
            (ResponseMethod::InnerSolve { achieved_tol: a }, ResponseMethod::InnerSolve { achieved_tol: b }) => {
                ResponseMethod::InnerSolve { achieved_tol: a.max(b) }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Response {
    pub point: Point,
    pub method: ResponseMethod,
}

impl Response {
    pub fn closed_form(point: Point) -> Self {
        Response { point, method: ResponseMethod::ClosedForm }
    }
}

/// A deterministic saddle function together with the oracles it supports.
///
/// Only `value` and `subgradients` are mandatory; best responses default to
/// [`Error::OracleUnavailable`].
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;

    fn value(&self, x: &[f64], y: &[f64]) -> f64;

    /// Deterministic partial subgradients at `(x, y)`.
    fn subgradients(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]);

    /// `argmin_{x in set_x} f(x, y) + prox term`.
    fn argmin_x(&self, _y: &[f64], _set_x: &ConvexSet, _prox: Option<Prox<'_>>) -> Result<Response> {
        Err(Error::OracleUnavailable("best response in x"))
    }

    /// `argmax_{y in set_y} f(x, y)`.
    fn argmax_y(&self, _x: &[f64], _set_y: &ConvexSet) -> Result<Response> {
        Err(Error::OracleUnavailable("best response in y"))
    }

    /// Saddle point in closed form, when the objective admits one for these sets.
    fn closed_form_saddle(
        &self,
        _set_x: &ConvexSet,
        _set_y: &ConvexSet,
        _prox: Option<Prox<'_>>,
    ) -> Option<(Point, Point)> {
        None
    }
}

#[derive(Clone, Debug)]
struct Regularizer {
    center: Point,
    gamma: f64,
}

/// A stochastic min-max problem `min_{x in X} max_{y in Y} f(x, y)`.
#[derive(Clone)]
pub struct SaddleProblem {
    name: String,
    set_x: ConvexSet,
    set_y: ConvexSet,
    curvature: Curvature,
    lambda: f64,
    noise: NoiseModel,
    objective: Arc<dyn Objective>,
    regularizer: Option<Regularizer>,
    start: (Point, Point),
    saddle: Arc<OnceLock<(Point, Point, ResponseMethod)>>,
}

impl fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("name", &self.name)
            .field("dim_x", &self.dim_x())
            .field("dim_y", &self.dim_y())
            .field("curvature", &self.curvature)
            .field("lambda", &self.lambda)
            .field("noise", &self.noise)
            .field("regularized", &self.regularizer.is_some())
            .finish()
    }
}

impl SaddleProblem {
    /// Assembles a problem, validating dimensions and moduli.
    ///
    /// `start` is the testbed's suggested initial pair; it is projected onto
    /// the feasible sets.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        set_x: ConvexSet,
        set_y: ConvexSet,
        curvature: Curvature,
        lambda: f64,
        noise: NoiseModel,
        start: (Point, Point),
    ) -> Result<Self> {
        if set_x.dim() != objective.dim_x() || set_y.dim() != objective.dim_y() {
            return Err(Error::InvalidProblem(format!(
                "sets have dimensions ({}, {}), objective ({}, {})",
                set_x.dim(),
                set_y.dim(),
                objective.dim_x(),
                objective.dim_y()
            )));
        }
        match curvature {
            Curvature::StronglyConvex { mu } if !(mu > 0.0 && mu.is_finite()) => {
                return Err(Error::InvalidProblem(format!("mu must be positive, got {mu}")))
            }
            Curvature::WeaklyConvex { rho } if !(rho > 0.0 && rho.is_finite()) => {
                return Err(Error::InvalidProblem(format!("rho must be positive, got {rho}")))
            }
            _ => {}
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda must be positive, got {lambda}")));
        }
        if let NoiseKind::Gaussian { sigma } = noise.kind {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidProblem(format!("sigma must be >= 0, got {sigma}")));
            }
        }
        let mut sx = start.0;
        let mut sy = start.1;
        if sx.dim() != set_x.dim() || sy.dim() != set_y.dim() {
            return Err(Error::InvalidProblem("start point has wrong dimension".into()));
        }
        set_x.project_in_place(&mut sx);
        set_y.project_in_place(&mut sy);
        Ok(SaddleProblem {
            name: name.into(),
            set_x,
            set_y,
            curvature,
            lambda,
            noise,
            objective,
            regularizer: None,
            start: (sx, sy),
            saddle: Arc::new(OnceLock::new()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_x(&self) -> usize {
        self.objective.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.objective.dim_y()
    }

    pub fn set_x(&self) -> &ConvexSet {
        &self.set_x
    }

    pub fn set_y(&self) -> &ConvexSet {
        &self.set_y
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// Strong-convexity modulus, or `None` in WCSC mode.
    pub fn mu(&self) -> Option<f64> {
        match self.curvature {
            Curvature::StronglyConvex { mu } => Some(mu),
            Curvature::WeaklyConvex { .. } => None,
        }
    }

    /// Weak-convexity modulus, or `None` in SCSC mode.
    pub fn rho(&self) -> Option<f64> {
        match self.curvature {
            Curvature::WeaklyConvex { rho } => Some(rho),
            Curvature::StronglyConvex { .. } => None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    /// Suggested feasible initial pair.
    pub fn start(&self) -> (Point, Point) {
        self.start.clone()
    }

    /// Same problem started from `(x, y)`, projected onto the feasible sets.
    pub fn with_start(&self, x: Point, y: Point) -> Result<Self> {
        if x.dim() != self.dim_x() {
            return Err(Error::DimensionMismatch { expected: self.dim_x(), got: x.dim() });
        }
        if y.dim() != self.dim_y() {
            return Err(Error::DimensionMismatch { expected: self.dim_y(), got: y.dim() });
        }
        let mut out = self.clone();
        out.start = (x, y);
        out.set_x.project_in_place(&mut out.start.0);
        out.set_y.project_in_place(&mut out.start.1);
        Ok(out)
    }

    /// Same problem with a different noise level (bounds rescaled accordingly).
    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        let mut out = self.clone();
        out.noise = noise;
        out
    }

    /// `f(x, y) + (gamma/2) |x - center|^2`.
    ///
    /// The result is in SCSC mode with modulus `mu + gamma` (from SCSC) or
    /// `gamma - rho` (from WCSC, requires `gamma > rho`).
    pub fn regularized(&self, center: &Point, gamma: f64) -> Result<Self> {
        if center.dim() != self.dim_x() {
            return Err(Error::DimensionMismatch { expected: self.dim_x(), got: center.dim() });
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidProblem(format!("gamma must be >= 0, got {gamma}")));
        }
        let mu = match self.curvature {
            Curvature::StronglyConvex { mu } => mu + gamma,
            Curvature::WeaklyConvex { rho } => {
                if !(gamma > rho) {
                    return Err(Error::InvalidProblem(format!("gamma = {gamma} must exceed rho = {rho}")));
                }
                gamma - rho
            }
        };
        let regularizer = match &self.regularizer {
            None => Regularizer { center: center.clone(), gamma },
            Some(r) => {
                // Sum of two isotropic quadratics is one isotropic quadratic.
                let g = r.gamma + gamma;
                let c = if g > 0.0 {
                    Point::new(r.center.iter().zip(center.iter()).map(|(a, b)| (r.gamma * a + gamma * b) / g).collect())
                } else {
                    center.clone()
                };
                Regularizer { center: c, gamma: g }
            }
        };
        let mut out = self.clone();
        out.curvature = Curvature::StronglyConvex { mu };
        out.regularizer = Some(regularizer);
        out.saddle = Arc::new(OnceLock::new());
        out.name = format!("{}+prox", self.name);
        Ok(out)
    }

    fn prox(&self) -> Option<Prox<'_>> {
        self.regularizer.as_ref().map(|r| Prox { center: &r.center, gamma: r.gamma })
    }

    pub fn check_feasible(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.dim_x() {
            return Err(Error::DimensionMismatch { expected: self.dim_x(), got: x.len() });
        }
        if y.len() != self.dim_y() {
            return Err(Error::DimensionMismatch { expected: self.dim_y(), got: y.len() });
        }
        if !self.set_x.contains(x, FEAS_TOL) {
            return Err(Error::Infeasible(format!("x at distance {:.3e}", self.set_x.distance(x))));
        }
        if !self.set_y.contains(y, FEAS_TOL) {
            return Err(Error::Infeasible(format!("y at distance {:.3e}", self.set_y.distance(y))));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut v = self.objective.value(x, y);
        if let Some(r) = &self.regularizer {
            v += 0.5 * r.gamma * crate::vecspace::dist_sq(x, &r.center);
        }
        v
    }

    /// Deterministic partial subgradients.
    pub fn subgradients(&self, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        self.objective.subgradients(x, y, gx, gy);
        if let Some(r) = &self.regularizer {
            for ((g, xi), ci) in gx.iter_mut().zip(x).zip(r.center.iter()) {
                *g += r.gamma * (xi - ci);
            }
        }
    }

    /// Stochastic partial subgradients sharing one noise sample.
    pub fn sample_subgradients<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        y: &[f64],
        rng: &mut R,
        gx: &mut [f64],
        gy: &mut [f64],
    ) {
        self.subgradients(x, y, gx, gy);
        if let NoiseKind::Gaussian { sigma } = self.noise.kind {
            if sigma > 0.0 {
                for g in gx.iter_mut().chain(gy.iter_mut()) {
                    let z: f64 = rng.sample(StandardNormal);
                    *g += sigma * z;
                }
            }
        }
    }

    /// `x̂(y) = argmin_{x in X} f(x, y)`.
    pub fn best_response_x(&self, y: &[f64]) -> Result<Response> {
        self.objective.argmin_x(y, &self.set_x, self.prox())
    }

    /// `ŷ(x) = argmax_{y in Y} f(x, y)`.
    pub fn best_response_y(&self, x: &[f64]) -> Result<Response> {
        self.objective.argmax_y(x, &self.set_y)
    }

    /// `P(x) = max_{y in Y} f(x, y)`.
    pub fn primal_value(&self, x: &[f64]) -> Result<f64> {
        let y = self.best_response_y(x)?;
        Ok(self.value(x, &y.point))
    }

    /// Gradient of the primal function by Danskin's rule, `∂_x f(x, ŷ(x))`.
    pub fn primal_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<(f64, Point)> {
        let y = self.best_response_y(x)?.point;
        let mut gy = vec![0.0; self.dim_y()];
        self.subgradients(x, &y, grad, &mut gy);
        Ok((self.value(x, &y), y))
    }

    /// The saddle point, from a closed form when available and otherwise by
    /// minimizing the primal function. Requires SCSC mode for the inner solve.
    pub fn saddle(&self) -> Result<(Point, Point, ResponseMethod)> {
        self.saddle_from(&self.start.0)
    }

    /// [`SaddleProblem::saddle`] with the inner solve warm-started at `warm_start`.
    pub fn saddle_from(&self, warm_start: &[f64]) -> Result<(Point, Point, ResponseMethod)> {
        if let Some(s) = self.saddle.get() {
            return Ok(s.clone());
        }
        let computed = match self.objective.closed_form_saddle(&self.set_x, &self.set_y, self.prox()) {
            Some((x, y)) => (x, y, ResponseMethod::ClosedForm),
            None => self.solve_saddle(warm_start)?,
        };
        Ok(self.saddle.get_or_init(|| computed).clone())
    }

    /// Saddle by accelerated projected gradient on the primal function.
    pub fn solve_saddle(&self, warm_start: &[f64]) -> Result<(Point, Point, ResponseMethod)> {
        let mu = self.mu().ok_or(Error::ModeMismatch { expected: "SCSC", actual: "WCSC" })?;
        let solve =
            minimize_smooth(&self.set_x, warm_start, mu, INNER_TOL, |x, g| self.primal_gradient(x, g).map(|(v, _)| v))?;
        let y = self.best_response_y(&solve.x)?;
        let method = ResponseMethod::InnerSolve { achieved_tol: solve.dist_bound }.combine(y.method);
        Ok((solve.x, y.point, method))
    }
}
