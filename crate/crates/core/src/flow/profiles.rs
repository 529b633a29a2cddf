use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent field `p(x)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentProfile {
    Constant { value: f64 },
    /// `from + (to − from) x`
    LinearRamp { from: f64, to: f64 },
    /// `base + height sin(π x)`
    Bump { base: f64, height: f64 },
}

impl ExponentProfile {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            ExponentProfile::Constant { value } => value,
            ExponentProfile::LinearRamp { from, to } => from + (to - from) * x,
            ExponentProfile::Bump { base, height } => base + height * (std::f64::consts::PI * x).sin(),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match *self {
            ExponentProfile::Constant { value } => value.is_finite(),
            ExponentProfile::LinearRamp { from, to } => from.is_finite() && to.is_finite(),
            ExponentProfile::Bump { base, height } => base.is_finite() && height.is_finite() && height >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid exponent profile {self:?}")))
        }
    }
}

/// Coefficient field `D(t, x)`, nonincreasing in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientProfile {
    Constant { value: f64 },
    /// `2 − t`
    TwoMinusT,
    /// `e^{−decay t} (base + amplitude sin(π x))`
    Separable { decay: f64, base: f64, amplitude: f64 },
}

impl CoefficientProfile {
    pub fn at(&self, t: f64, x: f64) -> f64 {
        match *self {
            CoefficientProfile::Constant { value } => value,
            CoefficientProfile::TwoMinusT => 2.0 - t,
            CoefficientProfile::Separable { decay, base, amplitude } => {
                (-decay * t).exp() * (base + amplitude * (std::f64::consts::PI * x).sin())
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match *self {
            CoefficientProfile::Constant { value } => value.is_finite(),
            CoefficientProfile::TwoMinusT => true,
            CoefficientProfile::Separable { decay, base, amplitude } => {
                decay >= 0.0 && decay.is_finite() && base.is_finite() && amplitude.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid coefficient profile {self:?}")))
        }
    }
}
