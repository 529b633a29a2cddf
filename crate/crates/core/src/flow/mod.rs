//! Discrete variable-exponent potential on `(0, 1)` with zero Dirichlet
//! data and its proximal implicit-Euler gradient flow.
//!
//! With `J` interior nodes, `h = 1/(J+1)` and forward differences
//! `dᵢ = (vᵢ₊₁ − vᵢ)/h`, `i = 0..=J`,
//!
//! ```text
//! φᵗ(v) = Σ_{i=0}^{J} h D(t, xᵢ)/pᵢ |dᵢ|^{pᵢ} + Σ_{i=1}^{J} h/pᵢ |vᵢ|^{pᵢ}
//! ```
//!
//! and the operator `A(t)v` is the gradient of `φᵗ` for the weighted inner
//! product `⟨a, b⟩_h = h Σ aᵢ bᵢ`.

mod profiles;
mod prox;

pub use profiles::{CoefficientProfile, ExponentProfile};
pub use prox::{
    complete_continuity_probe, monotonicity_probe, prox_step, prox_step_with, solve_monotone_ivp,
    FlowSolution, ProxOutcome, ProxSettings,
};

use crate::error::{check_dim, Error, Result};

/// Values at the `J` interior nodes of the uniform grid with mesh `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    h: f64,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a grid function needs at least one interior node"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite grid value"));
        }
        let h = 1.0 / (values.len() + 1) as f64;
        Ok(GridFunction { values, h })
    }

    pub fn zeros(j: usize) -> Result<Self> {
        Self::new(vec![0.0; j])
    }

    /// From values at all `J + 2` nodes; the two boundary values must vanish.
    pub fn from_full(full: &[f64]) -> Result<Self> {
        if full.len() < 3 {
            return Err(Error::invalid("need at least one interior node"));
        }
        if full[0] != 0.0 || full[full.len() - 1] != 0.0 {
            return Err(Error::invalid("boundary values must be zero"));
        }
        Self::new(full[1..full.len() - 1].to_vec())
    }

    /// Samples `f` at the interior nodes `xᵢ = i h`.
    pub fn from_fn(j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 1.0 / (j + 1) as f64;
        Self::new((1..=j).map(|i| f(i as f64 * h)).collect())
    }

    /// Inverse of [`GridFunction::isometric`].
    pub fn from_isometric(y: &[f64]) -> Result<Self> {
        let h = 1.0 / (y.len() + 1) as f64;
        Self::new(y.iter().map(|v| v / h.sqrt()).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mesh(&self) -> f64 {
        self.h
    }

    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        Ok(self.h * crate::linalg::dot(&self.values, &other.values))
    }

    /// `‖v‖_h = (h Σ vᵢ²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.h * crate::linalg::dot(&self.values, &self.values)).sqrt()
    }

    /// Coordinates `√h v`, in which the Euclidean norm is `‖·‖_h`.
    pub fn isometric(&self) -> Vec<f64> {
        crate::linalg::scale(&self.values, self.h.sqrt())
    }
}

/// Regularity data of the time dependence, indexed by the level `n`:
/// exponents `α = ½`, `β = 2` and functions `gₙ(t) = t + n`, `hₙ ≡ n`.
/// Recorded for reference; no check depends on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRegularity {
    pub alpha: f64,
    pub beta: f64,
}

impl TimeRegularity {
    pub fn g(&self, n: f64, t: f64) -> f64 {
        t + n
    }

    pub fn h(&self, n: f64) -> f64 {
        n
    }
}

/// `φᵗ` on a fixed grid. Time runs over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableExponentPotential {
    j: usize,
    h: f64,
    // exponents at x_0 .. x_J (the last interior node's right edge uses x_J)
    p: Vec<f64>,
    exponent: ExponentProfile,
    coefficient: CoefficientProfile,
    horizon: f64,
    beta_d: f64,
}

impl VariableExponentPotential {
    /// Validates `p⁻ > 2` (or `p⁻ ≥ 2` when `linear_oracle` is set), the lower
    /// bound `D ≥ β_D > 0` on `[0, horizon]`, and that `D` does not increase
    /// in time on a grid of 257 times.
    pub fn new(
        j: usize,
        exponent: ExponentProfile,
        coefficient: CoefficientProfile,
        horizon: f64,
        linear_oracle: bool,
    ) -> Result<Self> {
        if j == 0 {
            return Err(Error::invalid("need at least one interior node"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon must be positive"));
        }
        exponent.validate()?;
        coefficient.validate()?;
        let h = 1.0 / (j + 1) as f64;
        let p: Vec<f64> = (0..=j).map(|i| exponent.at(i as f64 * h)).collect();
        let p_min = p.iter().cloned().fold(f64::INFINITY, f64::min);
        if linear_oracle {
            if p_min < 2.0 {
                return Err(Error::invalid(format!("exponent minimum {p_min} is below 2")));
            }
        } else if !(p_min > 2.0) {
            return Err(Error::invalid(format!("exponent minimum {p_min} must exceed 2")));
        }
        let mut beta_d = f64::INFINITY;
        let times = 256;
        for i in 0..=j {
            let x = i as f64 * h;
            let mut prev = f64::INFINITY;
            for k in 0..=times {
                let t = horizon * k as f64 / times as f64;
                let dv = coefficient.at(t, x);
                if dv > prev {
                    return Err(Error::invalid(format!("D increases in time at x = {x}, t = {t}")));
                }
                prev = dv;
                beta_d = beta_d.min(dv);
            }
        }
        if !(beta_d > 0.0) {
            return Err(Error::invalid(format!("D must stay positive, minimum is {beta_d}")));
        }
        Ok(VariableExponentPotential { j, h, p, exponent, coefficient, horizon, beta_d })
    }

    pub fn nodes(&self) -> usize {
        self.j
    }

    pub fn mesh(&self) -> f64 {
        self.h
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Lower bound of `D` on `[0, horizon]` over the grid.
    pub fn beta_d(&self) -> f64 {
        self.beta_d
    }

    pub fn exponent_range(&self) -> (f64, f64) {
        let lo = self.p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn exponent_profile(&self) -> &ExponentProfile {
        &self.exponent
    }

    pub fn coefficient_profile(&self) -> &CoefficientProfile {
        &self.coefficient
    }

    pub fn time_regularity(&self) -> TimeRegularity {
        TimeRegularity { alpha: 0.5, beta: 2.0 }
    }

    fn check(&self, v: &GridFunction) -> Result<()> {
        check_dim(self.j, v.len())
    }

    fn diff(&self, v: &[f64], i: usize) -> f64 {
        let left = if i == 0 { 0.0 } else { v[i - 1] };
        let right = if i == self.j { 0.0 } else { v[i] };
        (right - left) / self.h
    }

    fn coefficients_at(&self, t: f64) -> Vec<f64> {
        (0..=self.j).map(|i| self.coefficient.at(t, i as f64 * self.h)).collect()
    }

    pub(crate) fn energy_raw(&self, d: &[f64], v: &[f64]) -> f64 {
        let mut e = 0.0;
        for i in 0..=self.j {
            let di = self.diff(v, i);
            e += self.h * d[i] / self.p[i] * di.abs().powf(self.p[i]);
        }
        for i in 1..=self.j {
            e += self.h / self.p[i] * v[i - 1].abs().powf(self.p[i]);
        }
        e
    }

    /// Euclidean gradient of the energy with respect to the node values.
    pub(crate) fn gradient_raw(&self, d: &[f64], v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.j];
        for i in 0..=self.j {
            let di = self.diff(v, i);
            let s = d[i] * di.abs().powf(self.p[i] - 2.0) * di;
            if i >= 1 {
                g[i - 1] -= s;
            }
            if i < self.j {
                g[i] += s;
            }
        }
        for i in 1..=self.j {
            let x = v[i - 1];
            g[i - 1] += self.h * x.abs().powf(self.p[i] - 2.0) * x;
        }
        g
    }

    /// Tridiagonal Euclidean Hessian `(lower, diag, upper)`.
    pub(crate) fn hessian_raw(&self, d: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.j;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        for i in 0..=n {
            let di = self.diff(v, i);
            let k = (self.p[i] - 1.0) * d[i] * di.abs().powf(self.p[i] - 2.0) / self.h;
            if i >= 1 {
                diag[i - 1] += k;
            }
            if i < n {
                diag[i] += k;
            }
            if i >= 1 && i < n {
                off[i - 1] -= k;
            }
        }
        for i in 1..=n {
            diag[i - 1] += self.h * (self.p[i] - 1.0) * v[i - 1].abs().powf(self.p[i] - 2.0);
        }
        (off.clone(), diag, off)
    }

    /// `φᵗ(v)`.
    pub fn energy(&self, t: f64, v: &GridFunction) -> Result<f64> {
        self.check(v)?;
        Ok(self.energy_raw(&self.coefficients_at(t), v.values()))
    }

    /// `A(t)v`, the `⟨·,·⟩_h`-gradient of `φᵗ` at `v`.
    pub fn subgradient(&self, t: f64, v: &GridFunction) -> Result<GridFunction> {
        self.check(v)?;
        let g = self.gradient_raw(&self.coefficients_at(t), v.values());
        GridFunction::new(g.into_iter().map(|x| x / self.h).collect())
    }
}
