//! Independent reference computations shared by the integration tests.
//! None of these call into the solvers they are compared with.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Eigenvalue `(re, im)` of the generator on mode `n` (1-based), matching the
/// realified layout: heat is real, the other two are rotations.
pub fn eigen(kind: &str, n: usize) -> (f64, f64) {
    let n = n as f64;
    match kind {
        "heat" => (n * n, 0.0),
        "schroedinger" => (0.0, n * n),
        "wave1d" => (0.0, -n),
        _ => panic!("unknown kind {kind}"),
    }
}

pub fn state_dim(kind: &str, modes: usize) -> usize {
    if kind == "heat" {
        modes
    } else {
        2 * modes
    }
}

/// Right side `−E u + f` of the realified ODE.
fn rhs(kind: &str, modes: usize, u: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for n in 0..modes {
        let (re, im) = eigen(kind, n + 1);
        if kind == "heat" {
            out[n] = -re * u[n] + f[n];
        } else {
            let (a, b) = (u[2 * n], u[2 * n + 1]);
            // −(re + i im)(a + i b)
            out[2 * n] = -(re * a - im * b) + f[2 * n];
            out[2 * n + 1] = -(re * b + im * a) + f[2 * n + 1];
        }
    }
    out
}

/// Classical RK4 on `u' = −Eu + f̄ₖ` with the forcing held at the average of
/// its two node values for each coarse step, `sub` substeps per step.
pub fn rk4_duhamel(kind: &str, modes: usize, u0: &[f64], forcing: &[Vec<f64>], tau: f64, sub: usize) -> Vec<Vec<f64>> {
    let h = tau / sub as f64;
    let mut out = vec![u0.to_vec()];
    let mut u = u0.to_vec();
    for k in 0..forcing.len() - 1 {
        let fbar: Vec<f64> = forcing[k].iter().zip(&forcing[k + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
        for _ in 0..sub {
            let k1 = rhs(kind, modes, &u, &fbar);
            let y: Vec<f64> = u.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = rhs(kind, modes, &y, &fbar);
            let y: Vec<f64> = u.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = rhs(kind, modes, &y, &fbar);
            let y: Vec<f64> = u.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = rhs(kind, modes, &y, &fbar);
            for i in 0..u.len() {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        out.push(u.clone());
    }
    out
}

/// Trapezoid `L²` distance of two sampled paths.
pub fn l2_gap(a: &[Vec<f64>], b: &[Vec<f64>], step: f64) -> f64 {
    let sq: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum())
        .collect();
    let n = sq.len();
    let mut s = 0.5 * (sq[0] + sq[n - 1]);
    for v in &sq[1..n - 1] {
        s += v;
    }
    (s * step).sqrt()
}

/// Implicit Euler for `v' + D(−Δₕ)v + v = ḡ` with constant `D` in the
/// discrete sine basis of the `J`-node grid. `g` holds node values per time.
pub fn sine_basis_flow(j: usize, d: f64, v0: &[f64], g: &[Vec<f64>], tau: f64) -> Vec<Vec<f64>> {
    let h = 1.0 / (j + 1) as f64;
    // orthonormal for the Euclidean product: sqrt(2/(J+1)) sin(kπ xᵢ)
    let c = (2.0 / (j + 1) as f64).sqrt();
    let basis: Vec<Vec<f64>> = (1..=j)
        .map(|k| (1..=j).map(|i| c * (k as f64 * PI * i as f64 * h).sin()).collect())
        .collect();
    let mu: Vec<f64> = (1..=j)
        .map(|k| d * 4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2) + 1.0)
        .collect();
    let coords = |x: &[f64]| -> Vec<f64> { basis.iter().map(|e| e.iter().zip(x).map(|(a, b)| a * b).sum()).collect() };
    let mut a = coords(v0);
    let mut out = vec![v0.to_vec()];
    for k in 0..g.len() - 1 {
        let gbar: Vec<f64> = g[k].iter().zip(&g[k + 1]).map(|(x, y)| 0.5 * (x + y)).collect();
        let gc = coords(&gbar);
        for m in 0..j {
            a[m] = (a[m] + tau * gc[m]) / (1.0 + tau * mu[m]);
        }
        let mut v = vec![0.0; j];
        for m in 0..j {
            for i in 0..j {
                v[i] += a[m] * basis[m][i];
            }
        }
        out.push(v);
    }
    out
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closest point of the segment `[a, b]` to `x`.
pub fn segment_projection(x: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 == 0.0 { 0.0 } else { (dot(&sub(x, a), &ab) / len2).clamp(0.0, 1.0) };
    a.iter().zip(&ab).map(|(p, q)| p + t * q).collect()
}

/// Closest point of the triangle `abc` to `x` by minimising the quadratic
/// over the triangle's parameter domain: interior critical point if
/// feasible, otherwise the best of the three edges.
pub fn triangle_projection(x: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let r = sub(x, a);
    let (g11, g12, g22) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let det = g11 * g22 - g12 * g12;
    let mut best: Option<Vec<f64>> = None;
    if det > 1e-14 * (g11 * g22).max(1e-300) {
        let (r1, r2) = (dot(&r, &e1), dot(&r, &e2));
        let s = (g22 * r1 - g12 * r2) / det;
        let t = (g11 * r2 - g12 * r1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            best = Some(a.iter().enumerate().map(|(i, p)| p + s * e1[i] + t * e2[i]).collect());
        }
    }
    let mut cands = vec![segment_projection(x, a, b), segment_projection(x, b, c), segment_projection(x, a, c)];
    if let Some(p) = best {
        cands.push(p);
    }
    cands
        .into_iter()
        .min_by(|p, q| dot(&sub(x, p), &sub(x, p)).total_cmp(&dot(&sub(x, q), &sub(x, q))))
        .unwrap()
}

/// Distance from `x` to the hull of `verts` in two or three dimensions, as
/// the minimum over all vertex pairs (2-D) or triples (3-D): every such
/// simplex lies in the hull and the boundary is covered by them, which
/// settles points outside; points inside are detected by containment in a
/// sub-simplex (distance zero).
pub fn hull_distance(x: &[f64], verts: &[Vec<f64>]) -> f64 {
    let d = x.len();
    let k = verts.len();
    let mut best = f64::INFINITY;
    let mut upd = |p: Vec<f64>| {
        let r = sub(x, &p);
        best = best.min(dot(&r, &r).sqrt());
    };
    for i in 0..k {
        upd(verts[i].clone());
        for jj in i + 1..k {
            upd(segment_projection(x, &verts[i], &verts[jj]));
            if d == 3 {
                for l in jj + 1..k {
                    upd(triangle_projection(x, &verts[i], &verts[jj], &verts[l]));
                }
            }
        }
    }
    if d == 2 {
        for i in 0..k {
            for jj in i + 1..k {
                for l in jj + 1..k {
                    if in_triangle_2d(x, &verts[i], &verts[jj], &verts[l]) {
                        return 0.0;
                    }
                }
            }
        }
    } else if d == 3 {
        for i in 0..k {
            for jj in i + 1..k {
                for l in jj + 1..k {
                    for m in l + 1..k {
                        if in_tetrahedron(x, &verts[i], &verts[jj], &verts[l], &verts[m]) {
                            return 0.0;
                        }
                    }
                }
            }
        }
    }
    best
}

fn in_triangle_2d(x: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> bool {
    let cross = |o: &[f64], p: &[f64], q: &[f64]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
    let (d1, d2, d3) = (cross(a, b, x), cross(b, c, x), cross(c, a, x));
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

fn det3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn in_tetrahedron(x: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let (ab, ac, ad) = (sub(b, a), sub(c, a), sub(d, a));
    let vol = det3(&ab, &ac, &ad);
    if vol.abs() < 1e-14 {
        return false;
    }
    let ax = sub(x, a);
    let l1 = det3(&ax, &ac, &ad) / vol;
    let l2 = det3(&ab, &ax, &ad) / vol;
    let l3 = det3(&ab, &ac, &ax) / vol;
    l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0 && l1 + l2 + l3 <= 1.0
}

/// Golden-section minimum of a unimodal function on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Direct stepping of the coupled linear system
///
/// ```text
/// u' + E u = c_F ⟨u, e₁⟩ e₁,     heat modes,
/// v' + (−Δₕ + 1) v = c_G ⟨u, e₁⟩ w / √h,
/// ```
///
/// with the same trapezoid-averaged forcing and exponential / implicit
/// Euler steps as the iterated solver; the coupling is implicit in the
/// first mode, solved in closed form each step. `w` is a unit vector in the
/// isometric coordinates of the `J`-node grid. Returns `(u, v)` node paths.
pub fn linear_block(
    modes: usize,
    j: usize,
    c_f: f64,
    c_g: f64,
    w: &[f64],
    u0: &[f64],
    v0: &[f64],
    horizon: f64,
    steps: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let tau = horizon / steps as f64;
    let h = 1.0 / (j + 1) as f64;
    let mut u = u0.to_vec();
    let mut us = vec![u.clone()];
    // mode n decays with n²; φ = (1 − e^{−n²τ}) / n²
    let decay = |n: usize| (-((n * n) as f64) * tau).exp();
    let phi = |n: usize| (1.0 - decay(n)) / (n * n) as f64;
    let mut u1_hist = vec![u[0]];
    for _ in 0..steps {
        // u1' = e^{−τ}u1 + φ c_F (u1 + u1')/2
        let a = phi(1) * c_f * 0.5;
        let next1 = (decay(1) * u[0] + a * u[0]) / (1.0 - a);
        for n in 2..=modes {
            u[n - 1] *= decay(n);
        }
        u[0] = next1;
        us.push(u.clone());
        u1_hist.push(next1);
    }
    let g: Vec<Vec<f64>> = u1_hist.iter().map(|u1| w.iter().map(|x| c_g * u1 * x / h.sqrt()).collect()).collect();
    let vs = sine_basis_flow(j, 1.0, v0, &g, tau);
    (us, vs)
}
