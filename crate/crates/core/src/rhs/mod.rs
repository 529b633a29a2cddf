//! Set-valued right-hand sides `F(u, v) = conv{φₖ(u, v) eₖ}` over a finite
//! orthonormal family `e₁, …, e_N`.
//!
//! Both states are passed in coordinates where the Euclidean norm is the
//! state norm, so every bound below is a plain Euclidean estimate.

mod expr;

pub use expr::Expr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{hausdorff_distance, ConvexBody, Polytope};
use crate::linalg;

/// One coefficient function `φₖ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// Bounded continuous function with a structural sup-norm bound.
    General(Expr),
    /// `c ⟨u, w⟩ + ν(v) ‖v‖` with `ν` bounded. The readout `w` is a unit
    /// vector of the `u` space; when absent the direction `eₖ` itself is
    /// used, which requires `u` to live in the target space.
    Growth { c: f64, readout: Option<Vec<f64>>, nu: Expr },
}

/// Linear growth constants: every image point satisfies
/// `‖x‖ ≤ a ‖u‖ + b ‖v‖ + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEnvelope {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GrowthEnvelope {
    pub const ZERO: GrowthEnvelope = GrowthEnvelope { a: 0.0, b: 0.0, c: 0.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && c >= 0.0) || !(a + b + c).is_finite() {
            return Err(Error::invalid("growth constants must be finite and nonnegative"));
        }
        Ok(GrowthEnvelope { a, b, c })
    }

    pub fn bound(&self, norm_u: f64, norm_v: f64) -> f64 {
        self.a * norm_u + self.b * norm_v + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub max_vertex_norm: f64,
    pub envelope_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamilyMap {
    directions: Vec<Vec<f64>>,
    coefficients: Vec<Coefficient>,
    include_origin: bool,
}

impl BasisFamilyMap {
    pub fn new(directions: Vec<Vec<f64>>, coefficients: Vec<Coefficient>, include_origin: bool) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("at least one direction is required"));
        }
        if directions.len() != coefficients.len() {
            return Err(Error::invalid(format!(
                "{} directions but {} coefficients",
                directions.len(),
                coefficients.len()
            )));
        }
        let d = directions[0].len();
        for (i, e) in directions.iter().enumerate() {
            check_dim(d, e.len())?;
            for (j, f) in directions.iter().enumerate().take(i + 1) {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (linalg::dot(e, f) - expected).abs() > 1e-12 {
                    return Err(Error::invalid(format!("directions {j} and {i} are not orthonormal")));
                }
            }
        }
        for (k, coef) in coefficients.iter().enumerate() {
            if let Coefficient::Growth { c, readout, nu } = coef {
                if !c.is_finite() {
                    return Err(Error::invalid(format!("growth constant {k} is not finite")));
                }
                if nu.sup_bound().is_none() {
                    return Err(Error::invalid(format!("ν of coefficient {k} has no sup-norm bound")));
                }
                if let Some(w) = readout {
                    if (linalg::norm(w) - 1.0).abs() > 1e-12 {
                        return Err(Error::invalid(format!("readout {k} is not a unit vector")));
                    }
                }
            }
        }
        Ok(BasisFamilyMap { directions, coefficients, include_origin })
    }

    /// Coordinate directions `e₁ … e_N` of `ℝ^dim`.
    pub fn canonical_directions(dim: usize, n: usize) -> Result<Vec<Vec<f64>>> {
        if n > dim {
            return Err(Error::invalid(format!("{n} directions do not fit in dimension {dim}")));
        }
        Ok((0..n).map(|k| linalg::unit(dim, k)).collect())
    }

    /// `φₖ(u, v) = cₖ ⟨u, eₖ⟩ + νₖ(v) ‖v‖` on the canonical directions.
    pub fn growth(dim: usize, c: Vec<f64>, nu: Vec<Expr>) -> Result<Self> {
        if c.len() != nu.len() {
            return Err(Error::invalid("growth constants and ν functions differ in length"));
        }
        let dirs = Self::canonical_directions(dim, c.len())?;
        let coefs = c
            .into_iter()
            .zip(nu)
            .map(|(c, nu)| Coefficient::Growth { c, readout: None, nu })
            .collect();
        Self::new(dirs, coefs, false)
    }

    /// Constant map with value `{y}`.
    pub fn singleton(y: &[f64]) -> Result<Self> {
        let n = linalg::norm(y);
        let dir = if n > 0.0 {
            linalg::scale(y, 1.0 / n)
        } else {
            linalg::unit(y.len().max(1), 0)
        };
        Self::new(vec![dir], vec![Coefficient::General(Expr::constant(n))], false)
    }

    pub fn target_dim(&self) -> usize {
        self.directions[0].len()
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coefficients
    }

    pub fn include_origin(&self) -> bool {
        self.include_origin
    }

    /// The values `φₖ(u, v)`.
    pub fn coefficient_values(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let nv = linalg::norm(v);
        self.coefficients
            .iter()
            .zip(&self.directions)
            .enumerate()
            .map(|(k, (coef, e))| {
                let val = match coef {
                    Coefficient::General(expr) => expr.eval(u, v)?,
                    Coefficient::Growth { c, readout, nu } => {
                        let w = readout.as_deref().unwrap_or(e);
                        check_dim(w.len(), u.len())?;
                        c * linalg::dot(u, w) + nu.eval(u, v)? * nv
                    }
                };
                if val.is_finite() {
                    Ok(val)
                } else {
                    Err(Error::invalid(format!("coefficient {k} is not finite")))
                }
            })
            .collect()
    }

    pub fn vertices(&self, u: &[f64], v: &[f64]) -> Result<Vec<Vec<f64>>> {
        let vals = self.coefficient_values(u, v)?;
        let mut verts: Vec<Vec<f64>> = vals
            .iter()
            .zip(&self.directions)
            .map(|(&a, e)| linalg::scale(e, a))
            .collect();
        if self.include_origin {
            verts.push(vec![0.0; self.target_dim()]);
        }
        Ok(verts)
    }

    pub fn evaluate(&self, u: &[f64], v: &[f64]) -> Result<Polytope> {
        Polytope::new(self.vertices(u, v)?)
    }

    /// Growth constants valid for every `(u, v)`.
    ///
    /// Growth coefficients give `a = √2 ‖(cₖ)‖₂`, `b = √2 ‖(‖νₖ‖∞)‖₂`;
    /// general coefficients give `c = ‖(‖φₖ‖∞)‖₂`.
    pub fn envelope(&self) -> Result<GrowthEnvelope> {
        let (c2, nu2, s2) = self.square_sums()?;
        GrowthEnvelope::new((2.0 * c2).sqrt(), (2.0 * nu2).sqrt(), s2.sqrt())
    }

    fn square_sums(&self) -> Result<(f64, f64, f64)> {
        let mut c2 = 0.0;
        let mut nu2 = 0.0;
        let mut s2 = 0.0;
        for (k, coef) in self.coefficients.iter().enumerate() {
            match coef {
                Coefficient::General(expr) => {
                    let s = expr.sup_bound().ok_or_else(|| {
                        Error::invalid(format!("coefficient {k} has no sup-norm bound"))
                    })?;
                    s2 += s * s;
                }
                Coefficient::Growth { c, nu, .. } => {
                    c2 += c * c;
                    let s = nu.sup_bound().unwrap_or(f64::INFINITY);
                    nu2 += s * s;
                }
            }
        }
        Ok((c2, nu2, s2))
    }

    /// Checks `‖x‖² ≤ 2‖(cₖ)‖²‖u‖² + 2‖(νₖ)‖²‖v‖²` (plus the bounded part)
    /// at every vertex of `F(u, v)`; convexity extends it to the hull.
    pub fn growth_check(&self, u: &[f64], v: &[f64]) -> Result<GrowthReport> {
        let (c2, nu2, s2) = self.square_sums()?;
        let nu_ = linalg::norm(u);
        let nv = linalg::norm(v);
        let envelope_value = (2.0 * c2 * nu_ * nu_ + 2.0 * nu2 * nv * nv).sqrt() + s2.sqrt();
        let max_vertex_norm = self
            .vertices(u, v)?
            .iter()
            .map(|x| linalg::norm(x))
            .fold(0.0, f64::max);
        Ok(GrowthReport {
            max_vertex_norm,
            envelope_value,
            pass: max_vertex_norm <= envelope_value * (1.0 + 1e-12) + 1e-14,
        })
    }

    /// Lipschitz constant of each `φₖ` on `{‖u‖ ≤ radius, ‖v‖ ≤ radius}` with
    /// respect to `‖Δu‖ + ‖Δv‖`; `None` if some bound is not available.
    pub fn coefficient_lipschitz(&self, radius: f64) -> Option<Vec<f64>> {
        self.coefficients
            .iter()
            .map(|coef| match coef {
                Coefficient::General(expr) => expr.lipschitz_bound(),
                Coefficient::Growth { c, nu, .. } => {
                    // |ν(v)‖v‖ − ν(v')‖v'‖| ≤ sup|ν| ‖Δv‖ + L(ν) ‖v'‖ ‖Δv‖
                    let s = nu.sup_bound()?;
                    let l = nu.lipschitz_bound()?;
                    Some(c.abs().max(s + l * radius))
                }
            })
            .collect()
    }

    /// `(Σ Lₖ²)^{1/2}`; bounds `d_Hd(F(u,v), F(u',v'))` per unit of input
    /// distance because the Hausdorff distance of the two hulls is at most
    /// `maxₖ |φₖ(u,v) − φₖ(u',v')|`.
    pub fn hausdorff_lipschitz(&self, radius: f64) -> Option<f64> {
        self.coefficient_lipschitz(radius)
            .map(|ls| ls.iter().map(|l| l * l).sum::<f64>().sqrt())
    }

    pub fn distance_to_image(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        self.evaluate(u, v)?.distance(x)
    }

    /// Per pair, `(‖u − u'‖ + ‖v − v'‖, d_Hd(F(u,v), F(u',v')))`.
    pub fn hausdorff_modulus_probe(&self, pairs: &[ModulusPair]) -> Result<Vec<(f64, f64)>> {
        pairs
            .iter()
            .map(|p| {
                let a = ConvexBody::from(self.evaluate(&p.u, &p.v)?);
                let b = ConvexBody::from(self.evaluate(&p.u2, &p.v2)?);
                let input = linalg::dist(&p.u, &p.u2) + linalg::dist(&p.v, &p.v2);
                Ok((input, hausdorff_distance(&a, &b, 0)?.upper))
            })
            .collect()
    }
}

/// Two argument points `(u, v)` and `(u2, v2)` of a family map.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u2: Vec<f64>,
    pub v2: Vec<f64>,
}
