use crate::error::{Error, Result};
use crate::vecspace::{dist_sq, norm, ConvexSet, Point};

/// Target accuracy `|x - x*|` for inner solves.
pub const INNER_TOL: f64 = 1e-10;

const MAX_ITERS: usize = 500_000;

#[derive(Clone, Debug)]
pub struct SmoothSolve {
    pub x: Point,
    pub value: f64,
    /// Certified upper bound on the distance to the minimizer.
    pub dist_bound: f64,
    pub iterations: usize,
}

/// Minimizes an `m`-strongly convex, smooth `F` over `set` with accelerated
/// projected gradient (backtracking on the Lipschitz constant, gradient-based
/// restarts).
///
/// `oracle(x, grad)` writes `∇F(x)` into `grad` and returns `F(x)`. The solve
/// stops once the gradient mapping `G` certifies `|x - x*| <= 3|G|/m <= tol`.
pub fn minimize_smooth<F>(set: &ConvexSet, x0: &[f64], m: f64, tol: f64, mut oracle: F) -> Result<SmoothSolve>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    set.project_in_place(&mut x);
    let mut z = x.clone();
    let mut gz = vec![0.0; d];
    oracle(&z, &mut gz)?;
    let mut lip = 1.0f64.max(m);
    let mut t = 1.0f64;

    let mut x_new = vec![0.0; d];
    let mut g_new = vec![0.0; d];
    let mut diff = vec![0.0; d];
    let mut best_bound = f64::INFINITY;

    for iter in 0..MAX_ITERS {
        let f_new = loop {
            for i in 0..d {
                x_new[i] = z[i] - gz[i] / lip;
            }
            set.project_in_place(&mut x_new);
            let f_new = oracle(&x_new, &mut g_new)?;
            let step_sq = dist_sq(&x_new, &z);
            for i in 0..d {
                diff[i] = g_new[i] - gz[i];
            }
            if norm(&diff) <= lip * step_sq.sqrt() * (1.0 + 1e-12) || step_sq == 0.0 {
                break f_new;
            }
            lip *= 2.0;
            if !lip.is_finite() {
                return Err(Error::InnerSolve { what: "Lipschitz estimate diverged", achieved: best_bound });
            }
        };

        let mapping = lip * dist_sq(&x_new, &z).sqrt();
        let bound = 3.0 * mapping / m;
        best_bound = best_bound.min(bound);
        if bound <= tol {
            return Ok(SmoothSolve { x: Point::new(x_new), value: f_new, dist_bound: bound, iterations: iter + 1 });
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut momentum = (t - 1.0) / t_next;
        // Restart when the step and the momentum direction disagree.
        let disagreement: f64 = (0..d).map(|i| (z[i] - x_new[i]) * (x_new[i] - x[i])).sum();
        if disagreement > 0.0 {
            momentum = 0.0;
            t = 1.0;
        } else {
            t = t_next;
        }
        for i in 0..d {
            z[i] = x_new[i] + momentum * (x_new[i] - x[i]);
        }
        set.project_in_place(&mut z);
        x.copy_from_slice(&x_new);
        oracle(&z, &mut gz)?;
    }
    Err(Error::InnerSolve { what: "accelerated projected gradient hit its iteration cap", achieved: best_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_box_constrained_quadratic() {
        // F(x) = 0.5 (x1 - 2)^2 + 2 (x2 + 0.3)^2 over [-1, 1]^2, minimizer (1, -0.3).
        let set = ConvexSet::cube(2, 1.0).unwrap();
        let sol = minimize_smooth(&set, &[0.0, 0.0], 1.0, 1e-12, |x, g| {
            g[0] = x[0] - 2.0;
            g[1] = 4.0 * (x[1] + 0.3);
            Ok(0.5 * (x[0] - 2.0).powi(2) + 2.0 * (x[1] + 0.3).powi(2))
        })
        .unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.x[1] + 0.3).abs() < 1e-12);
        assert!(sol.dist_bound <= 1e-12);
    }
}
