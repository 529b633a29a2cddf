use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::sampling;

use super::body::{Ball, BallCap, ConvexBody, Polytope};
use super::hausdorff::{diameter_of_union, hausdorff_distance};
use super::projection::{dykstra, DykstraSettings};
use super::DYKSTRA_SLACK;

/// Numerical slack allowed on top of a proven bound.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        BoundCheck { lhs, rhs, pass: lhs <= rhs + BOUND_SLACK }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `‖p_C(x) − p_D(x)‖ ≤ sqrt((4‖x‖ + 2R) d_Hd(C, D))` for bodies inside
/// `B[0, R]`, using the upper end of the Hausdorff bracket.
pub fn projection_difference_check(
    x: &[f64],
    c: &ConvexBody,
    d: &ConvexBody,
    bound: f64,
    resolution: usize,
) -> Result<BoundCheck> {
    check_dim(c.dim(), x.len())?;
    check_dim(d.dim(), x.len())?;
    for body in [c, d] {
        if body.norm_bound() > bound * (1.0 + 1e-12) {
            return Err(Error::pre(format!(
                "body reaches norm {} beyond the common bound {bound}",
                body.norm_bound()
            )));
        }
    }
    let lhs = linalg::dist(&c.project(x)?, &d.project(x)?);
    let hd = hausdorff_distance(c, d, resolution)?.upper;
    let rhs = ((4.0 * linalg::norm(x) + 2.0 * bound) * hd).sqrt();
    Ok(BoundCheck::new(lhs, rhs))
}

/// Whether `B[x0, rho] ⊆ body`.
///
/// For a polytope the sphere of radius `rho' = rho / (1 − s²/2)` is sampled,
/// where `s` is the chord covering radius of the unit-sphere net; if every
/// net point lies in the polytope then so does their hull, which contains
/// `B[x0, rho]`.
pub fn verify_ball_inside(body: &ConvexBody, x0: &[f64], rho: f64) -> Result<bool> {
    check_dim(body.dim(), x0.len())?;
    if !(rho > 0.0) {
        return Err(Error::invalid("Slater radius must be positive"));
    }
    match body {
        ConvexBody::Ball(b) => Ok(linalg::dist(x0, b.center()) + rho <= b.radius() + 1e-12),
        ConvexBody::Polytope(p) => polytope_contains_ball(p, x0, rho),
        ConvexBody::BallCapPolytope(k) => Ok(linalg::dist(x0, k.ball().center()) + rho
            <= k.ball().radius() + 1e-12
            && polytope_contains_ball(k.polytope(), x0, rho)?),
    }
}

fn polytope_contains_ball(p: &Polytope, x0: &[f64], rho: f64) -> Result<bool> {
    let d = x0.len();
    let resolution = match d {
        1 | 2 => 256,
        3 => 600,
        _ => 4000,
    };
    let (unit, s) = sampling::sphere_net(&vec![0.0; d], 1.0, resolution);
    if s * s >= 2.0 {
        return Ok(false);
    }
    let inflated = rho / (1.0 - s * s / 2.0);
    for u in &unit {
        if p.distance(&linalg::axpy(x0, inflated, u))? > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `dist(x, A ∩ B) ≤ (1 + d / ρ)(dist(x, A) + dist(x, B))` where
/// `B[x0, ρ] ⊆ B`, `x0 ∈ A`, `d = diam(A ∪ B)`.
///
/// The Slater data is verified first. The left side comes from Dykstra's
/// method on the two bodies and `d` is the lower end of its bracket, so the
/// comparison is never looser than the exact one.
pub fn slater_intersection_check(
    x: &[f64],
    a: &ConvexBody,
    b: &ConvexBody,
    x0: &[f64],
    rho: f64,
    resolution: usize,
) -> Result<BoundCheck> {
    check_dim(a.dim(), x.len())?;
    check_dim(b.dim(), x.len())?;
    check_dim(a.dim(), x0.len())?;
    if a.distance(x0)? > 1e-10 {
        return Err(Error::pre("Slater point is not in the first body"));
    }
    if !verify_ball_inside(b, x0, rho)? {
        return Err(Error::pre(format!("B[x0, {rho}] is not inside the second body")));
    }
    let out = dykstra(x, |y| a.project(y), |y| b.project(y), DykstraSettings::default())?;
    let lhs = linalg::dist(x, &out.point);
    let diam = diameter_of_union(a, b, resolution)?.lower;
    let rhs = (1.0 + diam / rho) * (a.distance(x)? + b.distance(x)?);
    Ok(BoundCheck::new(lhs, rhs))
}

/// Result of following `B[c_n, r] ∩ B_n` towards `B[c, r] ∩ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityProbe {
    /// Upper end of `d_Hd(B[c_n, r] ∩ B_n, B[c, r] ∩ B)` per index.
    pub values: Vec<f64>,
    /// A priori upper bound per index from the two halves of the
    /// convergence argument; infinite while the perturbation is still too
    /// large for the argument to apply.
    pub predicted: Vec<f64>,
    /// Covering slack of the sampling nets at the chosen resolution.
    pub slack: f64,
    /// Whether the open ball `B(c, r)` meets `B`.
    pub hypothesis_holds: bool,
}

impl ContinuityProbe {
    /// First index whose a priori bound plus sampling slack is at most `target`.
    pub fn derived_index(&self, target: f64) -> Option<usize> {
        self.predicted.iter().position(|p| p + self.slack <= target)
    }
}

/// Hausdorff distances between the perturbed intersections and the limit.
///
/// Fails with [`Error::EmptyIntersection`] naming the first index where
/// `B[c_n, r] ∩ B_n` is empty.
pub fn intersection_continuity_probe(
    c_seq: &[Vec<f64>],
    b_seq: &[Polytope],
    r: f64,
    c: &[f64],
    b: &Polytope,
    resolution: usize,
) -> Result<ContinuityProbe> {
    if c_seq.len() != b_seq.len() {
        return Err(Error::invalid("centre and polytope sequences differ in length"));
    }
    let limit_ball = Ball::new(c.to_vec(), r)?;
    let limit = ConvexBody::from(BallCap::new(limit_ball, b.clone())?);
    let limit_poly = ConvexBody::from(b.clone());
    let x0 = b.project(c)?;
    let dist_c = linalg::dist(&x0, c);
    let hypothesis_holds = dist_c < r;
    let rho = r - dist_c;

    let mut norm_bound = limit.norm_bound();
    let mut diam: f64 = 0.0;
    let mut eps = Vec::with_capacity(c_seq.len());
    let mut hd_poly = Vec::with_capacity(c_seq.len());
    for (cn, bn) in c_seq.iter().zip(b_seq) {
        check_dim(c.len(), cn.len())?;
        let pn = ConvexBody::from(bn.clone());
        let ball_n = ConvexBody::ball(cn.clone(), r)?;
        let h = hausdorff_distance(&pn, &limit_poly, resolution)?.upper;
        hd_poly.push(h);
        eps.push(linalg::dist(cn, c) + h);
        diam = diam.max(diameter_of_union(&ball_n, &pn, resolution)?.upper);
        norm_bound = norm_bound.max(ball_n.norm_bound()).max(pn.norm_bound());
    }
    let predicted = eps
        .iter()
        .zip(&hd_poly)
        .map(|(&e, &h)| {
            if !hypothesis_holds || e > rho {
                return f64::INFINITY;
            }
            let inner = (1.0 + diam / rho) * e;
            let outer = 2.0 * norm_bound * e / rho + h;
            inner.max(outer)
        })
        .collect();

    let mut values = Vec::with_capacity(c_seq.len());
    let mut slack = 0.0;
    for (n, (cn, bn)) in c_seq.iter().zip(b_seq).enumerate() {
        let kn = BallCap::new(Ball::new(cn.clone(), r)?, bn.clone()).map_err(|e| match e {
            Error::EmptyIntersection(msg) => Error::EmptyIntersection(format!("sequence index {n}: {msg}")),
            other => other,
        })?;
        let hb = hausdorff_distance(&ConvexBody::from(kn), &limit, resolution)?;
        slack = hb.width().max(slack);
        values.push(hb.upper);
    }
    Ok(ContinuityProbe {
        values,
        predicted,
        slack: slack.max(DYKSTRA_SLACK),
        hypothesis_holds,
    })
}
