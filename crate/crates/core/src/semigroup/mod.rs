//! Diagonal generators `E` on `(0, π)` acting on spectral coefficient
//! vectors, with `T(t) = e^{-tE}`.
//!
//! * `Heat`: `E φₙ = n² φₙ`, one real coefficient per mode.
//! * `Schroedinger`: `E φₙ = i n² φₙ`, so `T(t)` rotates mode `n` by `−t n²`.
//! * `Wave1D`: the reduced first-order wave block, `T(t)` rotates mode `n`
//!   by `+t n`.
//!
//! Complex coefficients are stored realified as consecutive `(re, im)`
//! pairs, so every kind works on plain `Vec<f64>` states whose Euclidean
//! norm is the `L²(0, π)` norm.

mod regularity;

pub use regularity::{
    counterexample_datum, counterexample_norm, counterexample_profile, counterexample_tail_bound,
    domain_datum, forcing_regularity, log_spaced, orbit_regularity, CounterexampleReport,
    RegularityReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::selection::TimePath;

/// Spectral coefficients; see the module docs for the layout.
pub type SpectralState = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Heat,
    #[serde(alias = "schrodinger")]
    Schroedinger,
    #[serde(rename = "wave1d")]
    Wave1D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralGenerator {
    kind: GeneratorKind,
    modes: usize,
}

impl SpectralGenerator {
    pub fn new(kind: GeneratorKind, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("at least one mode is required"));
        }
        Ok(SpectralGenerator { kind, modes })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Length of a state vector.
    pub fn dim(&self) -> usize {
        match self.kind {
            GeneratorKind::Heat => self.modes,
            _ => 2 * self.modes,
        }
    }

    /// `sup_{t ≥ 0} ‖T(t)‖`; all implemented kinds are contractive.
    pub fn bound(&self) -> f64 {
        1.0
    }

    /// Eigenvalue of `E` on mode `n ≥ 1`.
    pub fn eigenvalue(&self, n: usize) -> Complex64 {
        let n = n as f64;
        match self.kind {
            GeneratorKind::Heat => Complex64::new(n * n, 0.0),
            GeneratorKind::Schroedinger => Complex64::new(0.0, n * n),
            GeneratorKind::Wave1D => Complex64::new(0.0, -n),
        }
    }

    fn check(&self, s: &[f64]) -> Result<()> {
        check_dim(self.dim(), s.len())
    }

    fn load(&self, s: &[f64], n: usize) -> Complex64 {
        match self.kind {
            GeneratorKind::Heat => Complex64::new(s[n], 0.0),
            _ => Complex64::new(s[2 * n], s[2 * n + 1]),
        }
    }

    fn store(&self, s: &mut [f64], n: usize, z: Complex64) {
        match self.kind {
            GeneratorKind::Heat => s[n] = z.re,
            _ => {
                s[2 * n] = z.re;
                s[2 * n + 1] = z.im;
            }
        }
    }

    /// Applies the mode-wise multiplier `m(eigenvalue)`.
    fn apply(&self, s: &[f64], m: impl Fn(Complex64) -> Complex64) -> Vec<f64> {
        let mut out = vec![0.0; s.len()];
        for n in 0..self.modes {
            let z = m(self.eigenvalue(n + 1)) * self.load(s, n);
            self.store(&mut out, n, z);
        }
        out
    }

    /// `E s`.
    pub fn apply_generator(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check(s)?;
        Ok(self.apply(s, |e| e))
    }

    /// `T(t) s`.
    pub fn propagate(&self, s: &[f64], t: f64) -> Result<SpectralState> {
        self.check(s)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("propagation time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(s.to_vec());
        }
        Ok(self.apply(s, |e| (-e * t).exp()))
    }

    /// `λ (λ + E)⁻¹ s`.
    pub fn yosida(&self, s: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.check(s)?;
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!("Yosida parameter must be positive, got {lambda}")));
        }
        Ok(self.apply(s, |e| lambda / (lambda + e)))
    }

    /// One exponential-Euler step of `u' = −E u + f̄` over `tau` with the
    /// forcing held at `f̄`:
    /// `u ← e^{−τE} u + ∫₀^τ e^{−sE} ds · f̄`.
    pub fn step(&self, u: &[f64], forcing: &[f64], tau: f64) -> Result<SpectralState> {
        self.check(u)?;
        self.check(forcing)?;
        let mut out = vec![0.0; u.len()];
        for n in 0..self.modes {
            let e = self.eigenvalue(n + 1);
            let w = -e * tau;
            let decay = w.exp();
            let integral = if w.norm() < 1e-8 {
                tau * (1.0 + w / 2.0)
            } else {
                (decay - 1.0) / (-e)
            };
            let z = decay * self.load(u, n) + integral * self.load(forcing, n);
            self.store(&mut out, n, z);
        }
        Ok(out)
    }
}

/// Mild solution `u(t) = T(t)u₀ + ∫₀ᵗ T(t − s) f(s) ds` on the grid of `f`.
///
/// On each step the forcing is the average of its two end values, and that
/// constant is integrated exactly. This averaging makes the discrete scheme
/// obey `‖u(sₖ)‖ ≤ ‖u₀‖ + Σ τ‖f̄ⱼ‖ ≤ ‖u₀‖ + √sₖ ‖f‖`, with the trapezoid
/// `L²` norm on the right.
pub fn duhamel_solve(g: &SpectralGenerator, u0: &[f64], f: &TimePath) -> Result<TimePath> {
    g.check(u0)?;
    check_dim(g.dim(), f.dim())?;
    let tau = f.step();
    let mut values = Vec::with_capacity(f.len());
    values.push(u0.to_vec());
    for k in 0..f.len() - 1 {
        let avg = crate::linalg::lerp(f.value(k), f.value(k + 1), 0.5);
        let next = g.step(&values[k], &avg, tau)?;
        values.push(next);
    }
    TimePath::new(f.t0(), f.t1(), values)
}

/// Node-wise `λ (λ + E)⁻¹ p(sᵢ)`.
pub fn yosida_smooth(g: &SpectralGenerator, lambda: f64, p: &TimePath) -> Result<TimePath> {
    check_dim(g.dim(), p.dim())?;
    let values = p
        .values()
        .iter()
        .map(|v| g.yosida(v, lambda))
        .collect::<Result<Vec<_>>>()?;
    TimePath::new(p.t0(), p.t1(), values)
}
