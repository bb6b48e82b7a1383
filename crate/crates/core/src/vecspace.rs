//! Dense vectors and Euclidean projections.
//!
//! Every iterate in the solvers is a [`Point`]. Feasible regions are
//! described by [`ConvexSet`]; the epoch solvers additionally need the
//! projection onto a set intersected with a Euclidean ball, which is
//! [`project_intersection`].

use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of Dykstra sweeps before giving up.
pub const DYKSTRA_MAX_SWEEPS: usize = 10_000;
/// Stopping tolerance on the change between successive Dykstra iterates.
pub const DYKSTRA_TOL: f64 = 1e-10;
/// Feasibility slack accepted by downstream membership assertions.
pub const FEAS_TOL: f64 = 1e-9;

/// A dense vector in `R^d`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Point(vec![value; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.0[i] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist_sq(&self.0, &other.0).sqrt()
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        dist_sq(&self.0, &other.0)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Point) {
        axpy(&mut self.0, alpha, &other.0);
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent partial sums keep the reduction from being latency-bound.
    let n = a.len().min(b.len());
    let (a4, a_rest) = a[..n].split_at(n - n % 4);
    let (b4, b_rest) = b[..n].split_at(n - n % 4);
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += ca[k] * cb[k];
        }
    }
    let tail: f64 = a_rest.iter().zip(b_rest).map(|(x, y)| x * y).sum();
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// A nonempty closed convex region of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    WholeSpace {
        dim: usize,
    },
    Box {
        lower: Point,
        upper: Point,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    /// The probability simplex `{p >= 0, sum p = 1}`.
    Simplex {
        dim: usize,
    },
}

impl ConvexSet {
    pub fn whole_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("whole space needs dim >= 1".into()));
        }
        Ok(ConvexSet::WholeSpace { dim })
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() || lower.dim() == 0 {
            return Err(Error::InvalidSet(format!("box bounds have dimensions {} and {}", lower.dim(), upper.dim())));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidSet("box requires lower <= upper".into()));
        }
        if lower.iter().chain(upper.iter()).any(|v| v.is_nan()) {
            return Err(Error::InvalidSet("box bound is NaN".into()));
        }
        Ok(ConvexSet::Box { lower, upper })
    }

    /// The cube `[-r, r]^dim`.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        Self::boxed(Point::filled(dim, -r), Point::filled(dim, r))
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        if center.dim() == 0 || !center.is_finite() {
            return Err(Error::InvalidSet("ball center must be a finite, nonempty point".into()));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("simplex needs dim >= 1".into()));
        }
        Ok(ConvexSet::Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::WholeSpace { dim } | ConvexSet::Simplex { dim } => *dim,
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
        }
    }

    /// Largest Euclidean norm of any member; infinite for unbounded sets.
    pub fn max_norm(&self) -> f64 {
        match self {
            ConvexSet::WholeSpace { .. } => f64::INFINITY,
            ConvexSet::Box { lower, upper } => {
                lower.iter().zip(upper.iter()).map(|(l, u)| l.abs().max(u.abs()).powi(2)).sum::<f64>().sqrt()
            }
            ConvexSet::Ball { center, radius } => center.norm() + radius,
            ConvexSet::Simplex { .. } => 1.0,
        }
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance(&self, p: &[f64]) -> f64 {
        let mut q = p.to_vec();
        self.project_in_place(&mut q);
        dist_sq(&q, p).sqrt()
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::WholeSpace { .. } => true,
            ConvexSet::Box { lower, upper } => {
                p.iter().zip(lower.iter().zip(upper.iter())).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            }
            ConvexSet::Ball { center, radius } => dist_sq(p, center).sqrt() <= radius + tol,
            ConvexSet::Simplex { .. } => self.distance(p) <= tol,
        }
    }

    /// Overwrites `p` with its projection onto the set.
    ///
    /// The caller is responsible for matching dimensions; [`project`] checks.
    pub fn project_in_place(&self, p: &mut [f64]) {
        match self {
            ConvexSet::WholeSpace { .. } => {}
            ConvexSet::Box { lower, upper } => {
                for ((v, l), u) in p.iter_mut().zip(lower.iter()).zip(upper.iter()) {
                    *v = v.clamp(*l, *u);
                }
            }
            ConvexSet::Ball { center, radius } => project_ball_in_place(center, *radius, p),
            ConvexSet::Simplex { .. } => project_simplex_in_place(p),
        }
    }
}

/// Euclidean projection of `p` onto `set`.
pub fn project(set: &ConvexSet, p: &Point) -> Result<Point> {
    check_dim(set.dim(), p.dim())?;
    let mut q = p.clone();
    set.project_in_place(&mut q);
    Ok(q)
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn project_ball_in_place(center: &[f64], radius: f64, p: &mut [f64]) {
    let d = dist_sq(p, center).sqrt();
    if d > radius {
        let s = radius / d;
        for (v, c) in p.iter_mut().zip(center) {
            *v = c + s * (*v - c);
        }
    }
}

/// Sort-based projection onto the probability simplex.
fn project_simplex_in_place(p: &mut [f64]) {
    let mut sorted = p.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if *v - t > 0.0 {
            theta = t;
        }
    }
    for v in p.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Projection onto `set ∩ B(center, radius)`.
///
/// Exact when the set is the whole space, when one of the two single-set
/// projections already lands in the other set, or for a box containing the
/// center. Otherwise Dykstra's alternating projection is run until the
/// iterate and both partial projections agree to [`DYKSTRA_TOL`].
pub fn project_intersection(set: &ConvexSet, center: &Point, radius: f64, p: &Point) -> Result<Point> {
    check_dim(set.dim(), p.dim())?;
    check_dim(set.dim(), center.dim())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
    }
    let mut out = p.clone();
    project_intersection_in_place(set, center, radius, &mut out)?;
    Ok(out)
}

pub(crate) fn project_intersection_in_place(set: &ConvexSet, center: &[f64], radius: f64, p: &mut [f64]) -> Result<()> {
    if let ConvexSet::WholeSpace { .. } = set {
        project_ball_in_place(center, radius, p);
        return Ok(());
    }

    // Minimizer over the ball already in the set: it is also the minimizer
    // over the intersection. Same argument with the roles swapped.
    if let ConvexSet::Box { lower, upper } = set {
        let dist = dist_sq(p, center).sqrt();
        let s = if dist > radius { radius / dist } else { 1.0 };
        let ball_in_box = p
            .iter()
            .zip(center)
            .zip(lower.iter().zip(upper.iter()))
            .all(|((v, c), (l, u))| (l..=u).contains(&&(c + s * (v - c))));
        if ball_in_box {
            project_ball_in_place(center, radius, p);
            return Ok(());
        }
        let clipped_sq: f64 = p
            .iter()
            .zip(center)
            .zip(lower.iter().zip(upper.iter()))
            .map(|((v, c), (l, u))| (v.clamp(*l, *u) - c).powi(2))
            .sum();
        if clipped_sq <= radius * radius {
            set.project_in_place(p);
            return Ok(());
        }
        if set.contains(center, 0.0) {
            box_ball_path(lower, upper, center, radius, p);
            return Ok(());
        }
        return dykstra(set, center, radius, p);
    }
    let mut via_ball = p.to_vec();
    project_ball_in_place(center, radius, &mut via_ball);
    if set.contains(&via_ball, 0.0) {
        p.copy_from_slice(&via_ball);
        return Ok(());
    }
    let mut via_set = p.to_vec();
    set.project_in_place(&mut via_set);
    if dist_sq(&via_set, center) <= radius * radius {
        p.copy_from_slice(&via_set);
        return Ok(());
    }

    dykstra(set, center, radius, p)
}

/// Projection onto `box ∩ B(c, R)` for a center inside the box.
///
/// The minimizer is `clip(c + t (p - c))` for the largest `t` in `[0, 1]`
/// whose distance to `c` is at most `R`. Coordinate `i` leaves the box at
/// `t_i` and stays clipped afterwards, so the squared distance is a
/// piecewise quadratic in `t` solved exactly between sorted breakpoints.
fn box_ball_path(lower: &[f64], upper: &[f64], center: &[f64], radius: f64, p: &mut [f64]) {
    let mut breaks: Vec<(f64, usize)> = Vec::with_capacity(p.len());
    let mut free_sq = 0.0;
    for i in 0..p.len() {
        let dir = p[i] - center[i];
        let room = if dir > 0.0 { upper[i] - center[i] } else { lower[i] - center[i] };
        if dir != 0.0 {
            free_sq += dir * dir;
            breaks.push(((room / dir).max(0.0), i));
        }
    }
    breaks.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let r_sq = radius * radius;
    let mut clipped_sq = 0.0;
    let mut t = 1.0;
    for &(t_i, i) in &breaks {
        // On [previous break, t_i] the squared distance is `t^2 free + clipped`.
        if t_i * t_i * free_sq + clipped_sq >= r_sq {
            t = ((r_sq - clipped_sq) / free_sq).max(0.0).sqrt();
            break;
        }
        let dir = p[i] - center[i];
        free_sq -= dir * dir;
        let room = if dir > 0.0 { upper[i] - center[i] } else { lower[i] - center[i] };
        clipped_sq += room * room;
    }
    for ((v, c), (l, u)) in p.iter_mut().zip(center).zip(lower.iter().zip(upper)) {
        *v = (c + t * (*v - c)).clamp(*l, *u);
    }
}

fn dykstra(set: &ConvexSet, center: &[f64], radius: f64, p: &mut [f64]) -> Result<()> {
    let d = p.len();
    let mut x = p.to_vec();
    let mut y = vec![0.0; d];
    let mut inc_set = vec![0.0; d];
    let mut inc_ball = vec![0.0; d];
    let mut prev = x.clone();
    let mut residual = f64::INFINITY;

    for _ in 0..DYKSTRA_MAX_SWEEPS {
        prev.copy_from_slice(&x);
        for i in 0..d {
            y[i] = x[i] + inc_set[i];
        }
        set.project_in_place(&mut y);
        for i in 0..d {
            inc_set[i] += x[i] - y[i];
            x[i] = y[i] + inc_ball[i];
        }
        project_ball_in_place(center, radius, &mut x);
        for i in 0..d {
            inc_ball[i] += y[i] - x[i];
        }
        // `x` alone can stall for several sweeps while the increments
        // build up, so the two projections must also agree.
        let change = dist_sq(&x, &prev).sqrt();
        let split = dist_sq(&x, &y).sqrt();
        residual = set.distance(&x);
        if change <= DYKSTRA_TOL && split <= DYKSTRA_TOL && residual <= FEAS_TOL {
            p.copy_from_slice(&x);
            return Ok(());
        }
    }
    Err(Error::ProjectionNotConverged { last: Point::new(x), residual })
}
