use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::selection::TimePath;

use super::{GridFunction, VariableExponentPotential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxSettings {
    /// Relative stopping level for `‖(w − b)/τ + A(w)‖_h`.
    pub tol: f64,
    pub newton_iter: usize,
    pub gradient_iter: usize,
}

impl Default for ProxSettings {
    fn default() -> Self {
        ProxSettings { tol: 1e-10, newton_iter: 200, gradient_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutcome {
    pub point: GridFunction,
    /// `‖(w − v_prev)/τ + A(w) − g‖_h` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

struct Objective<'a> {
    pot: &'a VariableExponentPotential,
    d: Vec<f64>,
    b: Vec<f64>,
    tau: f64,
}

impl Objective<'_> {
    fn value(&self, w: &[f64]) -> f64 {
        let h = self.pot.mesh();
        let diff = linalg::sub(w, &self.b);
        self.pot.energy_raw(&self.d, w) + h / (2.0 * self.tau) * linalg::dot(&diff, &diff)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let h = self.pot.mesh();
        let mut g = self.pot.gradient_raw(&self.d, w);
        for ((gi, wi), bi) in g.iter_mut().zip(w).zip(&self.b) {
            *gi += h / self.tau * (wi - bi);
        }
        g
    }

    /// `‖∇/h‖_h`: the optimality residual in the weighted norm.
    fn residual(&self, grad: &[f64]) -> f64 {
        let h = self.pot.mesh();
        (linalg::dot(grad, grad) / h).sqrt()
    }
}

/// Minimiser of `w ↦ φ^{t}(w) + ‖w − v_prev − τ g‖²_h / (2τ)`, that is the
/// implicit-Euler step `(w − v_prev)/τ + A(t)w = g`.
pub fn prox_step(
    pot: &VariableExponentPotential,
    t: f64,
    v_prev: &GridFunction,
    g: &GridFunction,
    tau: f64,
) -> Result<GridFunction> {
    Ok(prox_step_with(pot, t, v_prev, g, tau, ProxSettings::default())?.point)
}

/// As [`prox_step`], reporting the residual. Damped Newton on the
/// tridiagonal Hessian runs first; Barzilai–Borwein gradient descent takes
/// over if the Newton line search stalls.
pub fn prox_step_with(
    pot: &VariableExponentPotential,
    t: f64,
    v_prev: &GridFunction,
    g: &GridFunction,
    tau: f64,
    settings: ProxSettings,
) -> Result<ProxOutcome> {
    check_dim(pot.nodes(), v_prev.len())?;
    check_dim(pot.nodes(), g.len())?;
    if !(tau > 0.0) {
        return Err(Error::invalid("prox step needs tau > 0"));
    }
    let obj = Objective {
        pot,
        d: pot.coefficients_at(t),
        b: linalg::axpy(v_prev.values(), tau, g.values()),
        tau,
    };
    let target = settings.tol * (1.0 + v_prev.norm());
    let mut w = v_prev.values().to_vec();
    let mut grad = obj.gradient(&w);
    let mut res = obj.residual(&grad);
    let mut iterations = 0;
    let h = pot.mesh();

    while res > target && iterations < settings.newton_iter {
        iterations += 1;
        let (lo, mut diag, up) = pot.hessian_raw(&obj.d, &w);
        diag.iter_mut().for_each(|x| *x += h / tau);
        let rhs: Vec<f64> = grad.iter().map(|x| -x).collect();
        let Some(step) = linalg::solve_tridiagonal(&lo, &diag, &up, &rhs) else {
            break;
        };
        let f0 = obj.value(&w);
        let slope = linalg::dot(&grad, &step);
        if !(slope < 0.0) {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-12 {
            let trial = linalg::axpy(&w, alpha, &step);
            let ft = obj.value(&trial);
            if ft <= f0 + 1e-4 * alpha * slope {
                accepted = Some(trial);
                break;
            }
            // near the optimum the decrease drowns in rounding; accept a full
            // step that lowers the residual instead
            if alpha == 1.0 {
                let gt = obj.gradient(&trial);
                if (ft - f0).abs() <= 1e-14 * f0.abs().max(1e-300) && obj.residual(&gt) < res {
                    accepted = Some(trial);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else { break };
        w = next;
        grad = obj.gradient(&w);
        res = obj.residual(&grad);
    }

    if res > target {
        // Barzilai–Borwein fallback with backtracking
        let mut step_len = tau / h;
        let budget = iterations + settings.gradient_iter;
        while res > target && iterations < budget {
            iterations += 1;
            let f0 = obj.value(&w);
            let gg = linalg::dot(&grad, &grad);
            let mut alpha = step_len;
            let mut next = None;
            for _ in 0..60 {
                let trial = linalg::axpy(&w, -alpha, &grad);
                if obj.value(&trial) <= f0 - 1e-4 * alpha * gg {
                    next = Some(trial);
                    break;
                }
                alpha *= 0.5;
            }
            let Some(trial) = next else { break };
            let g_new = obj.gradient(&trial);
            let s = linalg::sub(&trial, &w);
            let y = linalg::sub(&g_new, &grad);
            let sy = linalg::dot(&s, &y);
            step_len = if sy > 0.0 { linalg::dot(&s, &s) / sy } else { alpha };
            w = trial;
            grad = g_new;
            res = obj.residual(&grad);
        }
    }

    if res > target {
        return Err(Error::NonConvergence { method: "prox step", iterations, residual: res });
    }
    Ok(ProxOutcome { point: GridFunction::new(w)?, residual: res, iterations })
}

/// Trajectory of the implicit-Euler flow together with the largest prox
/// residual along it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub path: TimePath,
    pub max_residual: f64,
}

/// `v' + A(t)v = g`, `v(t0) = v0`, by implicit Euler on the grid of `g`
/// with node values as coordinates.
///
/// Step `k` uses the averaged forcing `(g(sₖ) + g(sₖ₊₁))/2` and `A(sₖ₊₁)`.
/// Because the prox map is nonexpansive with fixed point `0`, the scheme
/// satisfies `‖v(sₖ)‖_h ≤ ‖v0‖_h + Σⱼ τ‖ḡⱼ‖_h`.
pub fn solve_monotone_ivp(pot: &VariableExponentPotential, v0: &GridFunction, g: &TimePath) -> Result<FlowSolution> {
    check_dim(pot.nodes(), v0.len())?;
    check_dim(pot.nodes(), g.dim())?;
    let tau = g.step();
    let mut values = Vec::with_capacity(g.len());
    values.push(v0.values().to_vec());
    let mut current = v0.clone();
    let mut max_residual: f64 = 0.0;
    for k in 0..g.len() - 1 {
        let avg = GridFunction::new(linalg::lerp(g.value(k), g.value(k + 1), 0.5))?;
        let out = prox_step_with(pot, g.time(k + 1), &current, &avg, tau, ProxSettings::default())?;
        max_residual = max_residual.max(out.residual);
        current = out.point;
        values.push(current.values().to_vec());
    }
    Ok(FlowSolution { path: TimePath::new(g.t0(), g.t1(), values)?, max_residual })
}

/// `⟨A(t)v − A(t)w, v − w⟩_h`.
pub fn monotonicity_probe(pot: &VariableExponentPotential, t: f64, v: &GridFunction, w: &GridFunction) -> Result<f64> {
    let av = pot.subgradient(t, v)?;
    let aw = pot.subgradient(t, w)?;
    let da = GridFunction::new(linalg::sub(av.values(), aw.values()))?;
    let dv = GridFunction::new(linalg::sub(v.values(), w.values()))?;
    da.inner(&dv)
}

/// `sup_t ‖vₙ(t) − v(t)‖_h` for the forcings `gₙ(t) = g(t) + a sin(2π n t) w`,
/// one value per entry of `frequencies`.
pub fn complete_continuity_probe(
    pot: &VariableExponentPotential,
    v0: &GridFunction,
    g: &TimePath,
    w: &GridFunction,
    amplitude: f64,
    frequencies: &[usize],
) -> Result<Vec<f64>> {
    check_dim(pot.nodes(), w.len())?;
    let base = solve_monotone_ivp(pot, v0, g)?.path;
    let h = pot.mesh();
    frequencies
        .iter()
        .map(|&n| {
            let vals = (0..g.len())
                .map(|i| {
                    let s = amplitude * (2.0 * std::f64::consts::PI * n as f64 * g.time(i)).sin();
                    linalg::axpy(g.value(i), s, w.values())
                })
                .collect();
            let gn = TimePath::new(g.t0(), g.t1(), vals)?;
            let vn = solve_monotone_ivp(pot, v0, &gn)?.path;
            Ok(vn
                .values()
                .iter()
                .zip(base.values())
                .map(|(a, b)| (h * linalg::dot(&linalg::sub(a, b), &linalg::sub(a, b))).sqrt())
                .fold(0.0, f64::max))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{CoefficientProfile, ExponentProfile};

    fn cubic(j: usize) -> VariableExponentPotential {
        VariableExponentPotential::new(
            j,
            ExponentProfile::Constant { value: 3.0 },
            CoefficientProfile::Constant { value: 1.0 },
            1.0,
            false,
        )
        .unwrap()
    }

    #[test]
    fn zero_is_stationary() {
        let p = cubic(7);
        let z = GridFunction::zeros(7).unwrap();
        let out = prox_step(&p, 0.1, &z, &z, 0.01).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn optimality_residual_is_certified() {
        let p = VariableExponentPotential::new(
            15,
            ExponentProfile::LinearRamp { from: 2.2, to: 4.0 },
            CoefficientProfile::TwoMinusT,
            1.0,
            false,
        )
        .unwrap();
        let v = GridFunction::from_fn(15, |x| (5.0 * x).sin()).unwrap();
        let g = GridFunction::from_fn(15, |x| 3.0 * x).unwrap();
        let tau = 0.05;
        let out = prox_step_with(&p, 0.5, &v, &g, tau, ProxSettings::default()).unwrap();
        let a = p.subgradient(0.5, &out.point).unwrap();
        let r: Vec<f64> = (0..15)
            .map(|i| (out.point.values()[i] - v.values()[i]) / tau + a.values()[i] - g.values()[i])
            .collect();
        let rn = GridFunction::new(r).unwrap().norm();
        assert!(rn <= 1e-10 * (1.0 + v.norm()), "{rn}");
    }

    #[test]
    fn monotonicity_of_equal_arguments_is_zero() {
        let p = cubic(4);
        let v = GridFunction::from_fn(4, |x| x).unwrap();
        assert_eq!(monotonicity_probe(&p, 0.0, &v, &v).unwrap(), 0.0);
    }
}
