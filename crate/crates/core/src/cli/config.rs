//! Experiment configuration for `setflow solve`.
//!
//! Parsing is strict: unknown keys, missing keys and out-of-range values are
//! all rejected with the dotted path of the offending key.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{CoefficientProfile, ExponentProfile, GridFunction, VariableExponentPotential};
use crate::linalg;
use crate::rhs::{BasisFamilyMap, Coefficient, Expr};
use crate::sampling;
use crate::semigroup::{GeneratorKind, SpectralGenerator};
use crate::solver::{CoupledSystem, GlobalSettings, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub f_map: MapConfig,
    pub g_map: MapConfig,
    pub initial: InitialConfig,
    pub solver: SolverConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Number of modes `N`.
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Interior nodes `J` of the space grid.
    pub nodes: usize,
    /// Final time `T`.
    pub horizon: f64,
    /// Uniform time steps `K`.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub exponent: ExponentProfile,
    pub coefficient: CoefficientProfile,
    /// Admits `p ≡ 2`.
    #[serde(default)]
    pub linear_oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    /// Hull of `φₖ(u, v) eₖ` (and the origin when requested).
    Family {
        terms: Vec<TermConfig>,
        #[serde(default)]
        include_origin: bool,
    },
    /// The constant set `{value}`.
    Singleton { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Index `k` of the canonical direction `eₖ` of the target space.
    pub direction: usize,
    pub coefficient: CoefficientConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    /// `c ⟨u, e_readout⟩ + ν(v)‖v‖`; `readout` defaults to `direction`.
    Growth {
        c: f64,
        #[serde(default)]
        readout: Option<usize>,
        nu: Expr,
    },
    General { expr: Expr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u: InitialU,
    pub v: InitialV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialU {
    Zero,
    Values { values: Vec<f64> },
    /// Seeded uniform point of the ball of the given radius.
    Random { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialV {
    Zero,
    Values { values: Vec<f64> },
    /// `amplitude · sin(frequency π x)` at the nodes.
    Sine { amplitude: f64, frequency: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub theta: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Cap on window lengths; defaults to the horizon.
    #[serde(default)]
    pub max_window: Option<f64>,
}

/// Everything `solve` needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub system: CoupledSystem,
    pub u0: Vec<f64>,
    pub v0: GridFunction,
    pub settings: GlobalSettings,
}

fn cfg(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(key: &str, x: T, lo: T, hi: T) -> Result<()> {
    if x >= lo && x <= hi {
        Ok(())
    } else {
        Err(cfg(key, format!("{x} is outside [{lo}, {hi}]")))
    }
}

fn positive(key: &str, x: f64, hi: f64) -> Result<()> {
    if x > 0.0 && x <= hi {
        Ok(())
    } else {
        Err(cfg(key, format!("{x} is outside (0, {hi}]")))
    }
}

impl ExperimentConfig {
    /// Parses and validates; schema errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "<root>".to_string() } else { path };
            cfg(key, e.into_inner().to_string())
        })?;
        config.resolve()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn build_map(&self, key: &str, map: &MapConfig, target: usize, source_u: usize, source_v: usize) -> Result<BasisFamilyMap> {
        let built = match map {
            MapConfig::Singleton { value } => {
                if value.len() != target {
                    return Err(cfg(format!("{key}.value"), format!("expected {target} entries, got {}", value.len())));
                }
                BasisFamilyMap::singleton(value)
            }
            MapConfig::Family { terms, include_origin } => {
                if terms.is_empty() {
                    return Err(cfg(format!("{key}.terms"), "at least one term is required"));
                }
                let mut dirs = Vec::with_capacity(terms.len());
                let mut coefs = Vec::with_capacity(terms.len());
                for (i, term) in terms.iter().enumerate() {
                    let tk = format!("{key}.terms[{i}]");
                    if term.direction >= target {
                        return Err(cfg(format!("{tk}.direction"), format!("index must be below {target}")));
                    }
                    if terms[..i].iter().any(|t| t.direction == term.direction) {
                        return Err(cfg(format!("{tk}.direction"), "directions must be distinct"));
                    }
                    dirs.push(linalg::unit(target, term.direction));
                    let coef = match &term.coefficient {
                        CoefficientConfig::General { expr } => Coefficient::General(expr.clone()),
                        CoefficientConfig::Growth { c, readout, nu } => {
                            let r = readout.unwrap_or(term.direction);
                            if r >= source_u {
                                return Err(cfg(format!("{tk}.coefficient.readout"), format!("index must be below {source_u}")));
                            }
                            if !c.is_finite() {
                                return Err(cfg(format!("{tk}.coefficient.c"), "must be finite"));
                            }
                            Coefficient::Growth { c: *c, readout: Some(linalg::unit(source_u, r)), nu: nu.clone() }
                        }
                    };
                    let expr = match &coef {
                        Coefficient::General(e) => e,
                        Coefficient::Growth { nu, .. } => nu,
                    };
                    expr.eval(&vec![0.0; source_u], &vec![0.0; source_v])
                        .map_err(|e| cfg(format!("{tk}.coefficient"), e.to_string()))?;
                    coefs.push(coef);
                }
                BasisFamilyMap::new(dirs, coefs, *include_origin)
            }
        };
        let map = built.map_err(|e| cfg(key, e.to_string()))?;
        map.envelope().map_err(|e| cfg(key, e.to_string()))?;
        Ok(map)
    }

    /// Builds the system, initial data and solver settings.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        in_range("generator.modes", self.generator.modes, 1, 4096)?;
        in_range("grid.nodes", self.grid.nodes, 1, 4095)?;
        in_range("grid.steps", self.grid.steps, 1, 1_000_000)?;
        positive("grid.horizon", self.grid.horizon, 1e3)?;
        positive("solver.theta", self.solver.theta, 1.0)?;
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(cfg("solver.tol", format!("{} is outside (0, 1)", self.solver.tol)));
        }
        in_range("solver.max_iter", self.solver.max_iter, 1, 100_000)?;
        let max_window = self.solver.max_window.unwrap_or(self.grid.horizon);
        positive("solver.max_window", max_window, 1e3)?;

        let generator = SpectralGenerator::new(self.generator.kind, self.generator.modes)
            .map_err(|e| cfg("generator", e.to_string()))?;
        let potential = VariableExponentPotential::new(
            self.grid.nodes,
            self.potential.exponent.clone(),
            self.potential.coefficient.clone(),
            self.grid.horizon,
            self.potential.linear_oracle,
        )
        .map_err(|e| cfg("potential", e.to_string()))?;
        let (du, dv) = (generator.dim(), potential.nodes());
        let f_map = self.build_map("f_map", &self.f_map, du, du, dv)?;
        let g_map = self.build_map("g_map", &self.g_map, dv, du, dv)?;

        let u0 = match &self.initial.u {
            InitialU::Zero => vec![0.0; du],
            InitialU::Values { values } => {
                if values.len() != du {
                    return Err(cfg("initial.u.values", format!("expected {du} entries, got {}", values.len())));
                }
                values.clone()
            }
            InitialU::Random { radius } => {
                positive("initial.u.radius", *radius, 1e6)?;
                let mut rng = sampling::trial_rng(self.seed, 0);
                sampling::point_in_ball(&mut rng, &vec![0.0; du], *radius)
            }
        };
        let v0 = match &self.initial.v {
            InitialV::Zero => GridFunction::zeros(dv)?,
            InitialV::Values { values } => {
                if values.len() != dv {
                    return Err(cfg("initial.v.values", format!("expected {dv} entries, got {}", values.len())));
                }
                GridFunction::new(values.clone())?
            }
            InitialV::Sine { amplitude, frequency } => {
                let k = *frequency as f64 * std::f64::consts::PI;
                GridFunction::from_fn(dv, |x| amplitude * (k * x).sin())?
            }
        };
        if !linalg::is_finite(&u0) || !linalg::is_finite(v0.values()) {
            return Err(cfg("initial", "initial data must be finite"));
        }
        let system = CoupledSystem::new(generator, potential, f_map, g_map)?;
        let settings = GlobalSettings {
            horizon: self.grid.horizon,
            steps: self.grid.steps,
            max_window,
            solver: SolverSettings {
                theta: self.solver.theta,
                tol: self.solver.tol,
                max_iter: self.solver.max_iter,
                ..SolverSettings::default()
            },
        };
        Ok(ResolvedExperiment { system, u0, v0, settings })
    }
}
