use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    make_dro_scsc, make_phase_retrieval_wcsc, make_quadratic_scsc, DroData, NoiseKind, PhaseRetrievalData,
    SaddleProblem,
};
use crate::error::{Error, Result};
use crate::vecspace::{ConvexSet, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    /// Ones on the leading diagonal.
    Identity,
    /// i.i.d. `N(0, scale^2 / max(dim_x, dim_y))` entries.
    Gaussian { scale: f64 },
}

/// Initial pair suggested by the quadratic testbed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticStart {
    #[default]
    Origin,
    /// The box vertex farthest from the saddle point, coordinate by coordinate.
    OppositeCorner,
}

fn default_sigma() -> f64 {
    0.0
}

fn default_one() -> f64 {
    1.0
}

/// Serializable description of a testbed; `data_seed` fixes every generated
/// quantity so that only the run seeds vary the stochastic oracles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "testbed", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestbedSpec {
    Quadratic {
        dim_x: usize,
        dim_y: usize,
        mu: f64,
        lambda: f64,
        coupling: Coupling,
        /// Entries of `b` and `c` are `N(0, linear_scale^2)`.
        #[serde(default)]
        linear_scale: f64,
        /// Cube half-width for both sets; unconstrained when absent.
        #[serde(default)]
        box_radius: Option<f64>,
        #[serde(default)]
        start: QuadraticStart,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        data_seed: u64,
    },
    Dro {
        n_losses: usize,
        dim_x: usize,
        mu: f64,
        lambda: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        data_seed: u64,
    },
    PhaseRetrieval {
        n_terms: usize,
        dim_x: usize,
        lambda: f64,
        #[serde(default = "default_one")]
        box_radius: f64,
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        signal_norm: Option<f64>,
        #[serde(default)]
        measurement_noise: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        data_seed: u64,
    },
}

impl TestbedSpec {
    pub fn sigma(&self) -> f64 {
        match self {
            TestbedSpec::Quadratic { sigma, .. }
            | TestbedSpec::Dro { sigma, .. }
            | TestbedSpec::PhaseRetrieval { sigma, .. } => *sigma,
        }
    }

    pub fn sigma_mut(&mut self) -> &mut f64 {
        match self {
            TestbedSpec::Quadratic { sigma, .. }
            | TestbedSpec::Dro { sigma, .. }
            | TestbedSpec::PhaseRetrieval { sigma, .. } => sigma,
        }
    }

    fn noise(&self) -> NoiseKind {
        let sigma = self.sigma();
        if sigma == 0.0 {
            NoiseKind::None
        } else {
            NoiseKind::Gaussian { sigma }
        }
    }

    pub fn build(&self) -> Result<SaddleProblem> {
        match self {
            TestbedSpec::Quadratic {
                dim_x,
                dim_y,
                mu,
                lambda,
                coupling,
                linear_scale,
                box_radius,
                start,
                data_seed,
                ..
            } => {
                let (dx, dy) = (*dim_x, *dim_y);
                let mut rng = ChaCha8Rng::seed_from_u64(*data_seed);
                let a = match coupling {
                    Coupling::Identity => {
                        let mut a = vec![0.0; dx * dy];
                        for i in 0..dx.min(dy) {
                            a[i * dy + i] = 1.0;
                        }
                        a
                    }
                    Coupling::Gaussian { scale } => {
                        let s = scale / (dx.max(dy) as f64).sqrt();
                        (0..dx * dy).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>()
                    }
                };
                let mut gaussian = |n: usize| -> Point {
                    Point::new((0..n).map(|_| linear_scale * rng.sample::<f64, _>(StandardNormal)).collect())
                };
                let b = gaussian(dx);
                let c = gaussian(dy);
                let (sx, sy) = match box_radius {
                    Some(r) => (ConvexSet::cube(dx, *r)?, ConvexSet::cube(dy, *r)?),
                    None => (ConvexSet::whole_space(dx)?, ConvexSet::whole_space(dy)?),
                };
                let problem = make_quadratic_scsc(dx, dy, *mu, *lambda, a, b, c, self.noise(), sx, sy)?;
                match (start, box_radius) {
                    (QuadraticStart::Origin, _) => Ok(problem),
                    (QuadraticStart::OppositeCorner, Some(r)) => {
                        let (xs, ys, _) = problem.saddle()?;
                        let corner = |p: &Point| Point::new(p.iter().map(|v| if *v > 0.0 { -r } else { *r }).collect());
                        problem.with_start(corner(&xs), corner(&ys))
                    }
                    (QuadraticStart::OppositeCorner, None) => {
                        Err(Error::InvalidProblem("opposite_corner start needs box_radius".into()))
                    }
                }
            }
            TestbedSpec::Dro { n_losses, dim_x, mu, lambda, data_seed, .. } => {
                let data = DroData::generate(*n_losses, *dim_x, *data_seed);
                make_dro_scsc(*n_losses, *dim_x, *mu, *lambda, &data, self.noise())
            }
            TestbedSpec::PhaseRetrieval {
                n_terms,
                dim_x,
                lambda,
                box_radius,
                rho,
                signal_norm,
                measurement_noise,
                data_seed,
                ..
            } => {
                let data = PhaseRetrievalData::generate(
                    *n_terms,
                    *dim_x,
                    signal_norm.unwrap_or(0.5 * box_radius),
                    *measurement_noise,
                    *box_radius,
                    *data_seed,
                );
                make_phase_retrieval_wcsc(*n_terms, *dim_x, *rho, *lambda, *box_radius, &data, self.noise())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_problem() {
        let spec = TestbedSpec::Quadratic {
            dim_x: 3,
            dim_y: 2,
            mu: 1.0,
            lambda: 2.0,
            coupling: Coupling::Gaussian { scale: 1.0 },
            linear_scale: 1.0,
            box_radius: Some(1.0),
            start: QuadraticStart::OppositeCorner,
            sigma: 0.5,
            data_seed: 9,
        };
        let (p, q) = (spec.build().unwrap(), spec.build().unwrap());
        let x = [0.3, -0.1, 0.2];
        let y = [0.5, 0.25];
        assert_eq!(p.value(&x, &y), q.value(&x, &y));
        assert_eq!(p.noise(), q.noise());
        assert_eq!(p.start(), q.start());
        assert!(p.start().0.iter().all(|v| v.abs() == 1.0));
    }
}
