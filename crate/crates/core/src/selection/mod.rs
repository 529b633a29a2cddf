//! Time paths sampled on uniform grids and selections of set-valued maps
//! along them.
//!
//! A selection of `t ↦ F(u(t), v(t))` is represented node-wise: one value
//! per grid node together with its distance to the image set at that node.

use crate::error::{check_dim, Error, Result};
use crate::geometry::{dykstra, Ball, DykstraSettings};
use crate::linalg;
use crate::rhs::BasisFamilyMap;

/// Default membership tolerance for selection values.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Values on the uniform grid `t0 = s_0 < … < s_{K-1} = t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePath {
    t0: f64,
    t1: f64,
    values: Vec<Vec<f64>>,
}

impl TimePath {
    pub fn new(t0: f64, t1: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::invalid(format!("time interval [{t0}, {t1}] is empty")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("a time path needs at least two nodes"));
        }
        let d = values[0].len();
        for v in &values {
            check_dim(d, v.len())?;
        }
        Ok(TimePath { t0, t1, values })
    }

    /// Path with the same value at each of `nodes` grid points.
    pub fn constant(t0: f64, t1: f64, nodes: usize, value: &[f64]) -> Result<Self> {
        Self::new(t0, t1, vec![value.to_vec(); nodes])
    }

    /// Samples `f(t)` on the grid.
    pub fn from_fn(t0: f64, t1: f64, nodes: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::invalid("a time path needs at least two nodes"));
        }
        let h = (t1 - t0) / (nodes - 1) as f64;
        Self::new(t0, t1, (0..nodes).map(|i| f(t0 + i as f64 * h)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.len() - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.len() {
            self.t1
        } else {
            self.t0 + i as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().unwrap()
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn same_grid(&self, other: &TimePath) -> bool {
        self.len() == other.len() && self.t0 == other.t0 && self.t1 == other.t1
    }

    pub fn check_grid(&self, other: &TimePath) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::invalid("time paths live on different grids"))
        }
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<TimePath> {
        TimePath::new(self.t0, self.t1, self.values.iter().map(|v| f(v)).collect())
    }

    pub fn sub(&self, other: &TimePath) -> Result<TimePath> {
        self.check_grid(other)?;
        check_dim(self.dim(), other.dim())?;
        TimePath::new(
            self.t0,
            self.t1,
            self.values.iter().zip(&other.values).map(|(a, b)| linalg::sub(a, b)).collect(),
        )
    }

    /// `(1 − θ) self + θ other`.
    pub fn lerp(&self, other: &TimePath, theta: f64) -> Result<TimePath> {
        self.check_grid(other)?;
        check_dim(self.dim(), other.dim())?;
        TimePath::new(
            self.t0,
            self.t1,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| linalg::lerp(a, b, theta))
                .collect(),
        )
    }

    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| linalg::norm(v)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        path_l2_norm(self)
    }
}

/// `(∫ g)^{1/2}` for node values `g ≥ 0` by the composite trapezoid rule.
pub fn trapezoid_l2(values_sq: &[f64], step: f64) -> f64 {
    let n = values_sq.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values_sq[1..n - 1].iter().sum();
    (step * (inner + 0.5 * (values_sq[0] + values_sq[n - 1]))).max(0.0).sqrt()
}

/// `‖p‖_{L²(t0, t1)}` by the composite trapezoid rule on `‖p(sᵢ)‖²`.
pub fn path_l2_norm(p: &TimePath) -> f64 {
    let sq: Vec<f64> = p.values.iter().map(|v| linalg::dot(v, v)).collect();
    trapezoid_l2(&sq, p.step())
}

/// A time path together with the distance of each node value to its target
/// set.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPath {
    pub path: TimePath,
    pub residuals: Vec<f64>,
}

impl SelectionPath {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }

    /// Trapezoid `L²` norm of the residuals.
    pub fn residual_l2(&self) -> f64 {
        let sq: Vec<f64> = self.residuals.iter().map(|r| r * r).collect();
        trapezoid_l2(&sq, self.path.step())
    }
}

fn check_inputs(f: &BasisFamilyMap, u: &TimePath, v: &TimePath, x: &TimePath) -> Result<()> {
    u.check_grid(v)?;
    u.check_grid(x)?;
    check_dim(f.target_dim(), x.dim())
}

fn at_node(node: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Selection { .. } => e,
        other => Error::Selection { node, reason: other.to_string() },
    }
}

/// Node-wise nearest point of `anchor(sᵢ)` in `F(u(sᵢ), v(sᵢ))`.
pub fn nearest_point_selection(
    f: &BasisFamilyMap,
    u: &TimePath,
    v: &TimePath,
    anchor: &TimePath,
) -> Result<SelectionPath> {
    check_inputs(f, u, v, anchor)?;
    let mut values = Vec::with_capacity(u.len());
    let mut residuals = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let poly = f.evaluate(u.value(i), v.value(i)).map_err(at_node(i))?;
        let p = poly.project(anchor.value(i)).map_err(at_node(i))?;
        residuals.push(poly.distance(&p).map_err(at_node(i))?);
        values.push(p);
    }
    Ok(SelectionPath { path: TimePath::new(u.t0, u.t1, values)?, residuals })
}

/// Moves a selection `f` of `F(u_old, v)` to a selection of `F(u_new, v)`
/// that stays within `eps` of `f` at every node, by projecting `f(sᵢ)` onto
/// `B[f(sᵢ), eps] ∩ F(u_new(sᵢ), v(sᵢ))`.
///
/// Fails with [`Error::Selection`] at the first node where that
/// intersection is empty; the message carries `dist(f(sᵢ), F) − eps`.
pub fn approximate_selection(
    map: &BasisFamilyMap,
    u_new: &TimePath,
    v: &TimePath,
    f: &SelectionPath,
    eps: f64,
) -> Result<SelectionPath> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    check_inputs(map, u_new, v, &f.path)?;
    let mut values = Vec::with_capacity(u_new.len());
    let mut residuals = Vec::with_capacity(u_new.len());
    for i in 0..u_new.len() {
        let poly = map.evaluate(u_new.value(i), v.value(i)).map_err(at_node(i))?;
        let fi = f.path.value(i);
        let ball = Ball::new(fi.to_vec(), eps)?;
        let out = dykstra(fi, |y| ball.project(y), |y| poly.project(y), DykstraSettings::default())
            .map_err(at_node(i))?;
        let miss = ball.distance(&out.point);
        if miss > MEMBERSHIP_TOL {
            let gap = poly.distance(fi).map_err(at_node(i))? - eps;
            return Err(Error::Selection {
                node: i,
                reason: format!("B[f, eps] misses the image: distance exceeds eps by {gap:e}"),
            });
        }
        residuals.push(poly.distance(&out.point).map_err(at_node(i))?);
        values.push(out.point);
    }
    Ok(SelectionPath { path: TimePath::new(u_new.t0, u_new.t1, values)?, residuals })
}

/// Node-wise distances of `f(sᵢ)` to `F(u(sᵢ), v(sᵢ))`.
pub fn node_residuals(map: &BasisFamilyMap, u: &TimePath, v: &TimePath, f: &TimePath) -> Result<Vec<f64>> {
    check_inputs(map, u, v, f)?;
    (0..u.len())
        .map(|i| {
            map.evaluate(u.value(i), v.value(i))
                .and_then(|p| p.distance(f.value(i)))
                .map_err(at_node(i))
        })
        .collect()
}

/// Trapezoid `L²` norm of the node-wise distances of `f` to the images.
pub fn selection_residual(map: &BasisFamilyMap, u: &TimePath, v: &TimePath, f: &TimePath) -> Result<f64> {
    let r = node_residuals(map, u, v, f)?;
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    Ok(trapezoid_l2(&sq, u.step()))
}
