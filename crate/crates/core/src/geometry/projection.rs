use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

use super::body::{BallCap, Polytope};

/// Stopping rule for polytope projections: the optimality gap
/// `max_v ⟨x − p, v − p⟩` must drop below `tol · (1 + ‖x‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        ProjectionSettings {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DykstraSettings {
    fn default() -> Self {
        DykstraSettings {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeProjection {
    pub point: Vec<f64>,
    /// `max_v ⟨x − p, v − p⟩` over the vertex list.
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DykstraOutcome {
    /// Last output of the second projection, so it lies in the second set.
    pub point: Vec<f64>,
    /// Distance between the last two iterates.
    pub change: f64,
    /// Distance of `point` to the first set.
    pub residual_first: f64,
    /// Distance of `point` to the second set.
    pub residual_second: f64,
    pub iterations: usize,
}

pub fn project_ball(x: &[f64], center: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_dim(center.len(), x.len())?;
    if !(radius >= 0.0) {
        return Err(Error::invalid("negative radius"));
    }
    let diff = linalg::sub(x, center);
    let n = linalg::norm(&diff);
    if n <= radius {
        Ok(x.to_vec())
    } else {
        Ok(linalg::axpy(center, radius / n, &diff))
    }
}

fn certificate_gap(x: &[f64], p: &[f64], vertices: &[Vec<f64>]) -> f64 {
    let r = linalg::sub(x, p);
    vertices
        .iter()
        .map(|v| linalg::dot(&r, &linalg::sub(v, p)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Nearest point of `conv(P)` to `x`, certified by the optimality gap.
pub fn project_polytope(x: &[f64], poly: &Polytope, settings: ProjectionSettings) -> Result<PolytopeProjection> {
    project_polytope_with(x, poly, settings, false)
}

/// As [`project_polytope`]; `force_general` skips the planar fast path.
pub fn project_polytope_with(
    x: &[f64],
    poly: &Polytope,
    settings: ProjectionSettings,
    force_general: bool,
) -> Result<PolytopeProjection> {
    check_dim(poly.dim(), x.len())?;
    if !linalg::is_finite(x) {
        return Err(Error::invalid("non-finite point"));
    }
    let bound = settings.tol * (1.0 + linalg::norm(x));
    if let (Some(hull), false) = (poly.planar_hull(), force_general) {
        let p = project_planar(x, hull);
        let gap = certificate_gap(x, &p, poly.vertices());
        if gap <= bound {
            return Ok(PolytopeProjection { point: p, gap, iterations: 1 });
        }
    }
    let (lambda, iters) = wolfe(x, poly.vertices(), bound, settings.max_iter);
    let mut p = combine(poly.vertices(), &lambda);
    let mut gap = certificate_gap(x, &p, poly.vertices());
    let mut total = iters;
    if gap > bound {
        let (l2, it2) = projected_gradient(x, poly.vertices(), lambda, bound, settings.max_iter);
        total += it2;
        p = combine(poly.vertices(), &l2);
        gap = certificate_gap(x, &p, poly.vertices());
    }
    if gap > bound {
        return Err(Error::NonConvergence {
            method: "polytope projection",
            iterations: total,
            residual: gap,
        });
    }
    Ok(PolytopeProjection { point: p, gap, iterations: total })
}

fn combine(vertices: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; vertices[0].len()];
    for (v, &l) in vertices.iter().zip(lambda) {
        if l != 0.0 {
            for (pj, vj) in p.iter_mut().zip(v) {
                *pj += l * vj;
            }
        }
    }
    p
}

fn project_segment(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = linalg::sub(b, a);
    let len2 = linalg::dot(&ab, &ab);
    if len2 == 0.0 {
        return a.to_vec();
    }
    let t = (linalg::dot(&linalg::sub(x, a), &ab) / len2).clamp(0.0, 1.0);
    linalg::axpy(a, t, &ab)
}

fn project_planar(x: &[f64], hull: &[Vec<f64>]) -> Vec<f64> {
    match hull.len() {
        1 => hull[0].clone(),
        2 => project_segment(x, &hull[0], &hull[1]),
        n => {
            let inside = (0..n).all(|i| {
                let a = &hull[i];
                let b = &hull[(i + 1) % n];
                (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= 0.0
            });
            if inside {
                return x.to_vec();
            }
            let mut best = hull[0].clone();
            let mut best_d = f64::INFINITY;
            for i in 0..n {
                let q = project_segment(x, &hull[i], &hull[(i + 1) % n]);
                let d = linalg::dist(&q, x);
                if d < best_d {
                    best_d = d;
                    best = q;
                }
            }
            best
        }
    }
}

/// Wolfe's minimum-norm-point method on `conv{v − x}`; returns barycentric
/// weights over all vertices.
fn wolfe(x: &[f64], vertices: &[Vec<f64>], bound: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let m = vertices.len();
    let q: Vec<Vec<f64>> = vertices.iter().map(|v| linalg::sub(v, x)).collect();
    let start = (0..m)
        .min_by(|&i, &j| linalg::dot(&q[i], &q[i]).total_cmp(&linalg::dot(&q[j], &q[j])))
        .unwrap();
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut w = q[start].clone();
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        let ww = linalg::dot(&w, &w);
        let (j, wq) = (0..m)
            .map(|i| (i, linalg::dot(&w, &q[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if ww - wq <= bound || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);
        loop {
            let alpha = affine_min_norm(&q, &active);
            if alpha.iter().all(|&a| a > 1e-15) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-15 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in weights.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let keep: Vec<bool> = weights.iter().map(|&l| l > 1e-15).collect();
            let mut k = 0;
            active.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            weights.retain(|&l| l > 1e-15);
            if active.is_empty() {
                active.push(j);
                weights.push(1.0);
                break;
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|l| *l /= s);
            if active.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
        w = vec![0.0; x.len()];
        for (&i, &l) in active.iter().zip(&weights) {
            for (wk, qk) in w.iter_mut().zip(&q[i]) {
                *wk += l * qk;
            }
        }
    }
    let mut lambda = vec![0.0; m];
    for (&i, &l) in active.iter().zip(&weights) {
        lambda[i] += l;
    }
    (lambda, iters)
}

/// Affine weights (summing to one) of the minimum-norm point of `aff{q_i}`.
fn affine_min_norm(q: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    if k == 1 {
        return vec![1.0];
    }
    let d = q[0].len();
    let base = &q[active[0]];
    let a = DMatrix::from_fn(d, k - 1, |r, c| q[active[c + 1]][r] - base[r]);
    let b = DVector::from_fn(d, |r, _| -base[r]);
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1e-300);
    let beta = svd
        .solve(&b, eps)
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut out = Vec::with_capacity(k);
    out.push(1.0 - beta.sum());
    out.extend(beta.iter().copied());
    out
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Projected gradient with Barzilai–Borwein steps on barycentric weights.
fn projected_gradient(
    x: &[f64],
    vertices: &[Vec<f64>],
    start: Vec<f64>,
    bound: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let q: Vec<Vec<f64>> = vertices.iter().map(|v| linalg::sub(v, x)).collect();
    let residual = |l: &[f64]| combine(&q, l);
    let grad = |w: &[f64]| q.iter().map(|qi| linalg::dot(qi, w)).collect::<Vec<f64>>();
    let lip: f64 = q.iter().map(|qi| linalg::dot(qi, qi)).sum::<f64>().max(1e-300);
    let mut lambda = project_simplex(&start);
    let mut g = grad(&residual(&lambda));
    let mut step = 1.0 / lip;
    for it in 0..max_iter {
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        // ⟨λ, g⟩ − min g equals ‖w‖² − min_j ⟨w, q_j⟩
        let lg = linalg::dot(&lambda, &g);
        if lg - gmin <= bound {
            return (lambda, it);
        }
        let trial = project_simplex(&linalg::axpy(&lambda, -step, &g));
        let g_new = grad(&residual(&trial));
        let s = linalg::sub(&trial, &lambda);
        let yv = linalg::sub(&g_new, &g);
        let sy = linalg::dot(&s, &yv);
        step = if sy > 0.0 {
            (linalg::dot(&s, &s) / sy).clamp(1e-3 / lip, 1e6 / lip)
        } else {
            1.0 / lip
        };
        lambda = trial;
        g = g_new;
    }
    (lambda, max_iter)
}

/// Dykstra's alternating projections for `A ∩ B`, started at `x`.
///
/// Stops when successive iterates of both sequences move by at most `tol`.
/// Empty intersections do not error: the returned residuals show the gap.
pub fn dykstra<A, B>(x: &[f64], proj_first: A, proj_second: B, settings: DykstraSettings) -> Result<DykstraOutcome>
where
    A: Fn(&[f64]) -> Result<Vec<f64>>,
    B: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let d = x.len();
    let mut y = x.to_vec();
    let mut p = vec![0.0; d];
    let mut q = vec![0.0; d];
    let mut a_prev: Option<Vec<f64>> = None;
    for it in 1..=settings.max_iter {
        let a = proj_first(&linalg::add(&y, &p))?;
        for j in 0..d {
            p[j] += y[j] - a[j];
        }
        let b = proj_second(&linalg::add(&a, &q))?;
        for j in 0..d {
            q[j] += a[j] - b[j];
        }
        let change_b = linalg::dist(&b, &y);
        let change_a = a_prev.as_ref().map_or(linalg::dist(&a, &b), |ap| linalg::dist(ap, &a));
        y = b;
        if change_b <= settings.tol && change_a <= settings.tol {
            let residual_first = linalg::dist(&y, &proj_first(&y)?);
            let residual_second = linalg::dist(&y, &proj_second(&y)?);
            return Ok(DykstraOutcome {
                point: y,
                change: change_b,
                residual_first,
                residual_second,
                iterations: it,
            });
        }
        a_prev = Some(a);
    }
    let residual_first = linalg::dist(&y, &proj_first(&y)?);
    Err(Error::NonConvergence {
        method: "Dykstra",
        iterations: settings.max_iter,
        residual: residual_first,
    })
}

/// Projection onto `B[c, r] ∩ conv(P)`; the point returned lies in the hull.
pub fn project_intersection(x: &[f64], body: &BallCap, settings: DykstraSettings) -> Result<DykstraOutcome> {
    check_dim(body.ball().dim(), x.len())?;
    dykstra(x, |y| body.ball().project(y), |y| body.polytope().project(y), settings)
}
