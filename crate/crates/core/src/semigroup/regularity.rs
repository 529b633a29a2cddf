use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::selection::{path_l2_norm, TimePath};

use super::{duhamel_solve, GeneratorKind, SpectralGenerator};

/// Coefficient `aₙ = (1 + n²)^{−3/4}` of the non-Lipschitz orbit datum.
fn coefficient(n: usize) -> f64 {
    let n = n as f64;
    (1.0 + n * n).powf(-0.75)
}

/// `‖u(t) − f‖` for the Schrödinger orbit of `f = Σ_{n ≤ N} aₙ φₙ`,
/// summed directly as `Σ |e^{−itn²} − 1|² aₙ²`.
pub fn counterexample_norm(modes: usize, t: f64) -> f64 {
    let mut s = 0.0;
    for n in 1..=modes {
        let a = coefficient(n);
        // |e^{iθ} − 1| = 2 |sin(θ/2)|
        let half = 0.5 * t * (n as f64) * (n as f64);
        let d = 2.0 * half.sin();
        s += d * d * a * a;
    }
    s.sqrt()
}

/// Upper bound on `Σ_{n > N} aₙ²`: `∫_N^∞ (1 + x²)^{−3/2} dx = 1 − N / √(1 + N²)`.
pub fn counterexample_tail_bound(modes: usize) -> f64 {
    let n = modes as f64;
    // 1 − n/√(1+n²) written without cancellation
    let r = (1.0 + n * n).sqrt();
    1.0 / (r * (r + n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub modes: usize,
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Least-squares slope of `log norm` against `log t`; `None` with
    /// fewer than two distinct times.
    pub slope: Option<f64>,
    pub tail_bound: f64,
}

pub fn counterexample_profile(modes: usize, t_list: &[f64]) -> Result<CounterexampleReport> {
    if modes == 0 {
        return Err(Error::invalid("at least one mode is required"));
    }
    if let Some(t) = t_list.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::invalid(format!("time {t} is outside (0, 1]")));
    }
    let norm: Vec<f64> = t_list.iter().map(|&t| counterexample_norm(modes, t)).collect();
    let ratio = t_list.iter().zip(&norm).map(|(t, n)| n / t).collect();
    let lx: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = norm.iter().map(|n| n.ln()).collect();
    let slope = linalg::linear_fit(&lx, &ly).map(|(s, _)| s);
    Ok(CounterexampleReport {
        modes,
        t: t_list.to_vec(),
        norm,
        ratio,
        slope,
        tail_bound: counterexample_tail_bound(modes),
    })
}

/// `points` logarithmically spaced times from `t_min` to `t_max`.
pub fn log_spaced(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    if points <= 1 || t_min == t_max {
        return vec![t_min; points.min(1)];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                t_max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Empirical moduli `sup ‖u(t) − u(s)‖ / |t − s|^α` for `α = 1` and `α = ½`,
/// with the constants the regularity arguments predict for them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    pub lipschitz: f64,
    pub holder_half: f64,
    pub lipschitz_bound: f64,
    pub holder_bound: f64,
}

/// Moduli of the free orbit `t ↦ T(t)u₀` on the mesh `{k t_max / 2^levels}`.
///
/// For every implemented kind `‖T(t)u₀ − T(s)u₀‖ ≤ ‖T(|t − s|)u₀ − u₀‖`
/// with equality at `s = 0`, so the supremum over mesh pairs is a supremum
/// over lags. The predicted Lipschitz constant is `‖E u₀‖`.
pub fn orbit_regularity(g: &SpectralGenerator, u0: &[f64], t_max: f64, levels: u32) -> Result<RegularityReport> {
    check_dim(g.dim(), u0.len())?;
    if !(t_max > 0.0) {
        return Err(Error::invalid("t_max must be positive"));
    }
    let m = 1usize << levels;
    let h = t_max / m as f64;
    let mut lipschitz: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for k in 1..=m {
        let lag = k as f64 * h;
        let d = linalg::dist(&g.propagate(u0, lag)?, u0);
        lipschitz = lipschitz.max(d / lag);
        holder = holder.max(d / lag.sqrt());
    }
    let graph = linalg::norm(&g.apply_generator(u0)?);
    Ok(RegularityReport {
        lipschitz,
        holder_half: holder,
        lipschitz_bound: g.bound() * graph,
        holder_bound: g.bound() * graph * t_max.sqrt(),
    })
}

/// Moduli of `t ↦ ∫₀ᵗ T(t − s) f(s) ds` over all node pairs of the grid of `f`.
///
/// With `M = max(‖f‖, ‖E f‖)` in `L²(0, T₀)` the predicted bounds are
/// `‖u(t) − u(s)‖ ≤ C M √|t − s| + C² M √T₀ |t − s|`, which give
/// `C M (1 + C T₀)` for the Hölder-½ quotient and `C M (1/√h + C √T₀)` for
/// the Lipschitz quotient at mesh width `h`.
pub fn forcing_regularity(g: &SpectralGenerator, f: &TimePath) -> Result<RegularityReport> {
    check_dim(g.dim(), f.dim())?;
    let u = duhamel_solve(g, &vec![0.0; g.dim()], f)?;
    let mut lipschitz: f64 = 0.0;
    let mut holder: f64 = 0.0;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let lag = u.time(j) - u.time(i);
            let d = linalg::dist(u.value(i), u.value(j));
            lipschitz = lipschitz.max(d / lag);
            holder = holder.max(d / lag.sqrt());
        }
    }
    let ef = f.map(|v| g.apply_generator(v).unwrap_or_default())?;
    let m = path_l2_norm(f).max(path_l2_norm(&ef));
    let c = g.bound();
    let t0 = f.t1() - f.t0();
    Ok(RegularityReport {
        lipschitz,
        holder_half: holder,
        lipschitz_bound: c * m * (1.0 / f.step().sqrt() + c * t0.sqrt()),
        holder_bound: c * m * (1.0 + c * t0),
    })
}

/// States `cₙ = n^{-4}` (real parts only for the rotation kinds).
pub fn domain_datum(g: &SpectralGenerator) -> Vec<f64> {
    let mut s = vec![0.0; g.dim()];
    for n in 1..=g.modes() {
        let c = (n as f64).powi(-4);
        match g.kind() {
            GeneratorKind::Heat => s[n - 1] = c,
            _ => s[2 * (n - 1)] = c,
        }
    }
    s
}

/// The orbit datum `Σ aₙ φₙ` with `aₙ = (1 + n²)^{−3/4}`.
pub fn counterexample_datum(g: &SpectralGenerator) -> Vec<f64> {
    let mut s = vec![0.0; g.dim()];
    for n in 1..=g.modes() {
        match g.kind() {
            GeneratorKind::Heat => s[n - 1] = coefficient(n),
            _ => s[2 * (n - 1)] = coefficient(n),
        }
    }
    s
}
