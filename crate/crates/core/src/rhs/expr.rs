use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::linalg;

/// Scalar coefficient function of `(u, v)` built from a fixed set of
/// primitives, so sup-norm and Lipschitz bounds follow from the structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Const { value: f64 },
    /// `⟨u, dir⟩`
    InnerU { dir: Vec<f64> },
    /// `⟨v, dir⟩`
    InnerV { dir: Vec<f64> },
    NormU,
    NormV,
    /// `scale · arg + shift`
    Affine { scale: f64, shift: f64, arg: Box<Expr> },
    Clamp { lo: f64, hi: f64, arg: Box<Expr> },
    Sin { arg: Box<Expr> },
    Tanh { arg: Box<Expr> },
    Sum { terms: Vec<Expr> },
    Product { factors: Vec<Expr> },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const { value }
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const { value } => *value,
            Expr::InnerU { dir } => {
                check_dim(u.len(), dir.len())?;
                linalg::dot(u, dir)
            }
            Expr::InnerV { dir } => {
                check_dim(v.len(), dir.len())?;
                linalg::dot(v, dir)
            }
            Expr::NormU => linalg::norm(u),
            Expr::NormV => linalg::norm(v),
            Expr::Affine { scale, shift, arg } => scale * arg.eval(u, v)? + shift,
            Expr::Clamp { lo, hi, arg } => arg.eval(u, v)?.clamp(*lo, *hi),
            Expr::Sin { arg } => arg.eval(u, v)?.sin(),
            Expr::Tanh { arg } => arg.eval(u, v)?.tanh(),
            Expr::Sum { terms } => {
                let mut s = 0.0;
                for t in terms {
                    s += t.eval(u, v)?;
                }
                s
            }
            Expr::Product { factors } => {
                let mut p = 1.0;
                for f in factors {
                    p *= f.eval(u, v)?;
                }
                p
            }
        })
    }

    /// Bound on `sup |self|`, or `None` when the expression is unbounded.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Expr::Const { value } => Some(value.abs()),
            Expr::InnerU { dir } | Expr::InnerV { dir } => (linalg::norm(dir) == 0.0).then_some(0.0),
            Expr::NormU | Expr::NormV => None,
            Expr::Affine { scale, shift, arg } => {
                if *scale == 0.0 {
                    Some(shift.abs())
                } else {
                    arg.sup_bound().map(|s| scale.abs() * s + shift.abs())
                }
            }
            Expr::Clamp { lo, hi, arg } => {
                let box_bound = lo.abs().max(hi.abs());
                Some(arg.sup_bound().map_or(box_bound, |s| s.min(box_bound)))
            }
            Expr::Sin { arg } => Some(arg.sup_bound().map_or(1.0, |s| s.min(1.0))),
            Expr::Tanh { arg } => Some(arg.sup_bound().map_or(1.0, |s| s.min(1.0))),
            Expr::Sum { terms } => terms.iter().map(Expr::sup_bound).sum(),
            Expr::Product { factors } => factors.iter().map(Expr::sup_bound).product(),
        }
    }

    /// Global Lipschitz constant with respect to `‖Δu‖ + ‖Δv‖`, or `None`
    /// when no global constant follows from the structure.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            Expr::Const { .. } => Some(0.0),
            Expr::InnerU { dir } | Expr::InnerV { dir } => Some(linalg::norm(dir)),
            Expr::NormU | Expr::NormV => Some(1.0),
            Expr::Affine { scale, arg, .. } => {
                if *scale == 0.0 {
                    Some(0.0)
                } else {
                    arg.lipschitz_bound().map(|l| scale.abs() * l)
                }
            }
            Expr::Clamp { arg, .. } | Expr::Sin { arg } | Expr::Tanh { arg } => arg.lipschitz_bound(),
            Expr::Sum { terms } => terms.iter().map(Expr::lipschitz_bound).sum(),
            Expr::Product { factors } => {
                // L(fg) ≤ L(f) sup|g| + L(g) sup|f|, constant factors contribute nothing
                let mut total = 0.0;
                for (i, f) in factors.iter().enumerate() {
                    let lf = f.lipschitz_bound()?;
                    if lf == 0.0 {
                        continue;
                    }
                    let mut rest = 1.0;
                    for (j, g) in factors.iter().enumerate() {
                        if i != j {
                            rest *= g.sup_bound()?;
                        }
                    }
                    total += lf * rest;
                }
                Some(total)
            }
        }
    }

    /// Whether the value ignores `u`.
    pub fn independent_of_u(&self) -> bool {
        match self {
            Expr::InnerU { dir } => linalg::norm(dir) == 0.0,
            Expr::NormU => false,
            Expr::Const { .. } | Expr::InnerV { .. } | Expr::NormV => true,
            Expr::Affine { scale, arg, .. } => *scale == 0.0 || arg.independent_of_u(),
            Expr::Clamp { arg, .. } | Expr::Sin { arg } | Expr::Tanh { arg } => arg.independent_of_u(),
            Expr::Sum { terms } => terms.iter().all(Expr::independent_of_u),
            Expr::Product { factors } => factors.iter().all(Expr::independent_of_u),
        }
    }
}
