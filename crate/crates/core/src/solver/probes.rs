use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rhs::GrowthEnvelope;
use crate::sampling;
use crate::selection::{path_l2_norm, trapezoid_l2, TimePath};
use crate::semigroup::{duhamel_solve, yosida_smooth, SpectralGenerator};

use super::WindowParams;

const APRIORI_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriReport {
    /// `max(sup ‖u‖, sup ‖v‖)`.
    pub state_sup: f64,
    /// `C̃β + C̃√T max(‖f‖, ‖g‖)` with `T` the window length.
    pub bound: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub pass: bool,
    /// `‖f‖, ‖g‖ ≤ m`.
    pub in_selection_ball: bool,
}

/// Checks the a-priori state bound and `(f, g) ∈ B[0, m] × B[0, m]`.
/// `v` holds node values, `g` isometric values; `mesh` converts between them.
pub fn apriori_bound_check(
    u: &TimePath,
    v: &TimePath,
    f: &TimePath,
    g: &TimePath,
    w: &WindowParams,
    mesh: f64,
) -> AprioriReport {
    let v_sup = v.sup_norm() * mesh.sqrt();
    let state_sup = u.sup_norm().max(v_sup);
    let (norm_f, norm_g) = (path_l2_norm(f), path_l2_norm(g));
    let length = u.t1() - u.t0();
    let bound = w.c_tilde * w.beta + w.c_tilde * length.sqrt() * norm_f.max(norm_g);
    AprioriReport {
        state_sup,
        bound,
        norm_f,
        norm_g,
        pass: state_sup <= bound + APRIORI_SLACK,
        in_selection_ball: norm_f <= w.m + 1e-8 && norm_g <= w.m + 1e-8,
    }
}

/// `K = C̃‖u0‖ + √2‖v0‖ + (C̃ c_F + 2 c_G) T` and
/// `ρ = max(C̃ a_F + 2 a_G, C̃ b_F + 2 b_G)`.
pub fn gronwall_constants(
    f_env: GrowthEnvelope,
    g_env: GrowthEnvelope,
    c_tilde: f64,
    norm_u0: f64,
    norm_v0: f64,
    horizon: f64,
) -> (f64, f64) {
    let k = c_tilde * norm_u0 + 2f64.sqrt() * norm_v0 + (c_tilde * f_env.c + 2.0 * g_env.c) * horizon;
    let rho = (c_tilde * f_env.a + 2.0 * g_env.a).max(c_tilde * f_env.b + 2.0 * g_env.b);
    (k, rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallReport {
    pub k: f64,
    pub rho: f64,
    pub pass: bool,
    /// Smallest `K e^{ρt} − (‖u(t)‖ + ‖v(t)‖)` over the nodes.
    pub worst_margin: f64,
    pub first_violation: Option<usize>,
}

/// `‖u(t)‖ + ‖v(t)‖ ≤ K e^{ρ t}` at every node; `sums[i]` holds the left
/// side at `times[i]`, measured from the start of the run.
pub fn gronwall_check(times: &[f64], sums: &[f64], k: f64, rho: f64) -> GronwallReport {
    let mut worst = f64::INFINITY;
    let mut first = None;
    for (i, (&t, &s)) in times.iter().zip(sums).enumerate() {
        let margin = k * (rho * t).exp() - s;
        worst = worst.min(margin);
        if margin < -1e-6 && first.is_none() {
            first = Some(i);
        }
    }
    GronwallReport { k, rho, pass: first.is_none(), worst_margin: worst, first_violation: first }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementaryReport {
    /// `max |closed form − recursion|` over the fine grid.
    pub closed_form_gap: f64,
    /// Largest `u(t) − (c + ½∫₀ᵗh)` over all sub-solutions (≤ 0 passes).
    pub worst_excess: f64,
    pub subsolutions: usize,
    pub pass: bool,
}

/// Integral inequality `u(t)² ≤ c² + ∫₀ᵗ h u` implies `u(t) ≤ c + ½∫₀ᵗ h`.
///
/// `h` is piecewise constant with value `h_steps[i]` on the `i`-th of
/// `h_steps.len()` equal pieces of `[0, t_end]`; each piece is split into
/// `refine` fine steps. The extremal solution `c + ½∫h` is compared with
/// the implicit trapezoid recursion for `u² = c² + ∫hu`, and `trials`
/// random sub-solutions (each step takes only a random fraction `σ ∈ [0,1]`
/// of the admissible square) are checked against the bound.
pub fn elementary_bound_probe(
    c: f64,
    h_steps: &[f64],
    t_end: f64,
    refine: usize,
    trials: usize,
    seed: u64,
) -> Result<ElementaryReport> {
    if !(c >= 0.0) || h_steps.iter().any(|h| !(*h >= 0.0)) {
        return Err(Error::invalid("c and h must be nonnegative"));
    }
    if h_steps.is_empty() || refine == 0 || !(t_end > 0.0) {
        return Err(Error::invalid("need at least one piece, one fine step and t_end > 0"));
    }
    let n = h_steps.len() * refine;
    let tau = t_end / n as f64;
    let hbar: Vec<f64> = (0..n).map(|k| h_steps[k / refine]).collect();
    let mut bound = vec![c; n + 1];
    for k in 0..n {
        bound[k + 1] = bound[k] + 0.5 * tau * hbar[k];
    }

    // X_{k+1} = X_k + (τ h̄/2)(u_k + u_{k+1}),  u_{k+1}² = σ (c² + X_{k+1})
    let run = |sigma: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let mut u = vec![0.0; n + 1];
        let mut x = 0.0;
        u[0] = (sigma(0) * c * c).sqrt();
        for k in 0..n {
            let a = 0.5 * tau * hbar[k];
            let s = sigma(k + 1);
            let q = c * c + x + a * u[k];
            // u² − s a u − s q = 0, larger root
            let next = 0.5 * (s * a + ((s * a).powi(2) + 4.0 * s * q).sqrt());
            x += a * (u[k] + next);
            u[k + 1] = next;
        }
        u
    };
    let extremal = run(&|_| 1.0);
    let closed_form_gap = extremal
        .iter()
        .zip(&bound)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..trials {
        let mut rng = sampling::trial_rng(seed, trial as u64);
        let sig: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let u = run(&|k| sig[k]);
        // re-validate the sub-solution property with an independent sum
        let mut x = 0.0;
        for k in 0..=n {
            if k > 0 {
                x += 0.5 * tau * hbar[k - 1] * (u[k - 1] + u[k]);
            }
            if u[k] * u[k] > c * c + x + 1e-12 * (1.0 + x) {
                return Err(Error::invalid(format!("trial {trial} is not a sub-solution at step {k}")));
            }
        }
        for (a, b) in u.iter().zip(&bound) {
            worst_excess = worst_excess.max(a - b);
        }
    }
    if trials == 0 {
        worst_excess = extremal
            .iter()
            .zip(&bound)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let pass = closed_form_gap <= 1e-8 && worst_excess <= 1e-10;
    Ok(ElementaryReport { closed_form_gap, worst_excess, subsolutions: trials, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YosidaPoint {
    pub lambda: f64,
    /// `‖u_λ − u‖²` in `L²(0, T₀)`.
    pub lhs: f64,
    /// `(T₀² C̃² / 2) ‖f_λ − f‖²`.
    pub rhs: f64,
    pub pass: bool,
}

/// Effect of replacing `f` by `λ(λ + E)⁻¹ f` on the mild solution, one
/// point per `λ`.
pub fn yosida_stability_check(
    g: &SpectralGenerator,
    f: &TimePath,
    lambdas: &[f64],
    u0: &[f64],
) -> Result<Vec<YosidaPoint>> {
    let base = duhamel_solve(g, u0, f)?;
    let t0 = f.t1() - f.t0();
    let c = g.bound();
    lambdas
        .iter()
        .map(|&lambda| {
            let fl = yosida_smooth(g, lambda, f)?;
            let ul = duhamel_solve(g, u0, &fl)?;
            let du: Vec<f64> = ul
                .values()
                .iter()
                .zip(base.values())
                .map(|(a, b)| {
                    let d = linalg::sub(a, b);
                    linalg::dot(&d, &d)
                })
                .collect();
            let lhs = trapezoid_l2(&du, f.step()).powi(2);
            let rhs = 0.5 * (t0 * c).powi(2) * path_l2_norm(&fl.sub(f)?).powi(2);
            Ok(YosidaPoint { lambda, lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-10) + 1e-14 })
        })
        .collect()
}
