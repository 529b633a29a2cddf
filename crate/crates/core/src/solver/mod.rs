//! Coupled fixed-point solver for
//!
//! ```text
//!     u' + E u      = f,   f ∈ F(u, v)
//!     v' + A(t) v   = g,   g ∈ G(u, v)
//! ```
//!
//! Given selections `(f, g)` the two linear-in-forcing problems are solved
//! by [`duhamel_solve`] and [`solve_monotone_ivp`]; the map
//! `(f, g) ↦ (P_F f, P_G g)`, where `P` projects node-wise onto the images at
//! the resulting states, is iterated with relaxation until `(f, g)` are
//! selections of the images of their own solution.
//!
//! The maps see `v` in isometric coordinates `√h v` (see
//! [`GridFunction::isometric`]) and `G` returns values in the same
//! coordinates, so every norm in this module is Euclidean.

mod probes;

pub use probes::{
    apriori_bound_check, elementary_bound_probe, gronwall_check, gronwall_constants,
    yosida_stability_check, AprioriReport, ElementaryReport, GronwallReport, YosidaPoint,
};

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::flow::{solve_monotone_ivp, GridFunction, VariableExponentPotential};
use crate::linalg;
use crate::rhs::{BasisFamilyMap, GrowthEnvelope};
use crate::selection::{nearest_point_selection, node_residuals, trapezoid_l2, SelectionPath, TimePath};
use crate::semigroup::{duhamel_solve, SpectralGenerator};

/// State norms beyond this are reported as blow-up.
pub const BLOWUP_NORM: f64 = 1e12;

/// Local existence constants of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowParams {
    /// Bound of the semigroup on the window.
    pub c_tilde: f64,
    /// Bound of the initial data: `‖u0‖, ‖v0‖ ≤ β`.
    pub beta: f64,
    /// `m = C̃ β + 1`, the `L²` radius of the selection ball `M`.
    pub m: f64,
    /// Bound of the images of `F` and `G` over the a-priori state ball.
    pub r: f64,
    /// Admissible window length.
    pub t0: f64,
    /// A-priori state radius `C̃β + C̃√T₀ m`.
    pub rho_sol: f64,
}

/// Window constants for initial data bounded by `beta` and window lengths
/// capped at `t_max`.
///
/// `T₀` is the largest `T ≤ t_max` with `T r(T)² ≤ m²`, where `r(T)` is the
/// larger envelope value on the state ball of radius `C̃β + C̃√T m`. Both
/// sides are monotone in `T`, so bisection finds it; for bounded maps
/// (`a = b = 0`) this is `min(t_max, (m/c)²)`.
pub fn compute_window(
    c_tilde: f64,
    beta: f64,
    f_env: GrowthEnvelope,
    g_env: GrowthEnvelope,
    t_max: f64,
) -> Result<WindowParams> {
    if !(c_tilde >= 1.0) || !c_tilde.is_finite() {
        return Err(Error::invalid("semigroup bound must be at least 1"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::invalid("initial-data bound must be finite and nonnegative"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::invalid("maximal window length must be positive"));
    }
    for env in [f_env, g_env] {
        if !(env.a + env.b + env.c).is_finite() {
            return Err(Error::invalid("growth envelope is not finite"));
        }
    }
    let m = c_tilde * beta + 1.0;
    let radius = |t: f64| c_tilde * beta + c_tilde * t.sqrt() * m;
    let image = |t: f64| {
        let rho = radius(t);
        f_env.bound(rho, rho).max(g_env.bound(rho, rho))
    };
    let fits = |t: f64| t * image(t).powi(2) <= m * m;
    let t0 = if fits(t_max) {
        t_max
    } else {
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        lo
    };
    if !(t0 > 0.0) {
        return Err(Error::invalid("window length collapsed to zero"));
    }
    Ok(WindowParams { c_tilde, beta, m, r: image(t0), t0, rho_sol: radius(t0) })
}

/// The two evolutions and the two right-hand sides.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub generator: SpectralGenerator,
    pub potential: VariableExponentPotential,
    pub f_map: BasisFamilyMap,
    pub g_map: BasisFamilyMap,
}

impl CoupledSystem {
    pub fn new(
        generator: SpectralGenerator,
        potential: VariableExponentPotential,
        f_map: BasisFamilyMap,
        g_map: BasisFamilyMap,
    ) -> Result<Self> {
        check_dim(generator.dim(), f_map.target_dim())?;
        check_dim(potential.nodes(), g_map.target_dim())?;
        Ok(CoupledSystem { generator, potential, f_map, g_map })
    }

    pub fn envelopes(&self) -> Result<(GrowthEnvelope, GrowthEnvelope)> {
        Ok((self.f_map.envelope()?, self.g_map.envelope()?))
    }

    /// `S(f, g)`: the mild solution for `f` and the implicit-Euler flow for
    /// `g` (given in isometric coordinates). Returns `u`, `v` in node values
    /// and `v` in isometric coordinates.
    pub fn solve_linear(
        &self,
        u0: &[f64],
        v0: &GridFunction,
        f: &TimePath,
        g: &TimePath,
    ) -> Result<(TimePath, TimePath, TimePath)> {
        f.check_grid(g)?;
        let u = duhamel_solve(&self.generator, u0, f)?;
        let scale = 1.0 / self.potential.mesh().sqrt();
        let g_nodes = g.map(|y| linalg::scale(y, scale))?;
        let v = solve_monotone_ivp(&self.potential, v0, &g_nodes)?.path;
        let y = v.map(|x| linalg::scale(x, 1.0 / scale))?;
        Ok((u, v, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Initial relaxation weight.
    pub theta: f64,
    /// Stopping level for both the `L²` and the node-wise selection residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation weights are halved on residual growth down to this floor.
    pub theta_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { theta: 0.5, tol: 1e-8, max_iter: 500, theta_floor: 1.0 / 1024.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// `L²` distance of `f` to `Sel F(u, v)` at the returned iterate.
    pub residual_f: f64,
    pub residual_g: f64,
    pub max_node_residual_f: f64,
    pub max_node_residual_g: f64,
    /// `(residual_f, residual_g)` per iteration.
    pub history: Vec<(f64, f64)>,
    pub theta: f64,
    /// Whether each relaxed update cut the node residuals at least by the
    /// factor `1 − θ`.
    pub relaxation_contracts: bool,
    pub apriori: AprioriReport,
    pub window: WindowParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSolution {
    pub u: TimePath,
    /// Node values of `v`.
    pub v: TimePath,
    pub f: SelectionPath,
    /// Values of `g` in isometric coordinates.
    pub g: SelectionPath,
    pub report: SolveReport,
}

fn l2_of(res: &[f64], step: f64) -> f64 {
    let sq: Vec<f64> = res.iter().map(|r| r * r).collect();
    trapezoid_l2(&sq, step)
}

fn max_of(res: &[f64]) -> f64 {
    res.iter().cloned().fold(0.0, f64::max)
}

/// One window of the relaxed selection iteration on `nodes` grid points
/// over `[t_start, t_end]`.
///
/// Starts from the nearest-point selection of `0`, so constant singleton
/// maps are solved by the first iterate. Non-convergence is not an error:
/// the report carries `converged = false` and the best iterate.
pub fn solve_window(
    sys: &CoupledSystem,
    u0: &[f64],
    v0: &GridFunction,
    t_start: f64,
    t_end: f64,
    nodes: usize,
    params: &WindowParams,
    settings: &SolverSettings,
) -> Result<WindowSolution> {
    check_dim(sys.generator.dim(), u0.len())?;
    check_dim(sys.potential.nodes(), v0.len())?;
    if !(settings.theta > 0.0 && settings.theta <= 1.0) {
        return Err(Error::invalid("relaxation weight must lie in (0, 1]"));
    }
    let slack = 1e-12 * (1.0 + params.beta);
    if linalg::norm(u0) > params.beta + slack || v0.norm() > params.beta + slack {
        return Err(Error::pre("initial data exceed the window bound beta"));
    }
    if t_end - t_start > params.t0 * (1.0 + 1e-12) {
        return Err(Error::pre(format!(
            "window length {} exceeds T0 = {}",
            t_end - t_start,
            params.t0
        )));
    }
    let du = sys.generator.dim();
    let dv = sys.potential.nodes();
    let zero_f = TimePath::constant(t_start, t_end, nodes, &vec![0.0; du])?;
    let zero_g = TimePath::constant(t_start, t_end, nodes, &vec![0.0; dv])?;
    let (u, _, y) = sys.solve_linear(u0, v0, &zero_f, &zero_g)?;
    let mut f = nearest_point_selection(&sys.f_map, &u, &y, &zero_f)?.path;
    let mut g = nearest_point_selection(&sys.g_map, &u, &y, &zero_g)?.path;

    let mut theta = settings.theta;
    let mut history = Vec::new();
    let mut contracts = true;
    let mut prev_total = f64::INFINITY;
    let step = f.step();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (u, v, y) = sys.solve_linear(u0, v0, &f, &g)?;
        let fs = nearest_point_selection(&sys.f_map, &u, &y, &f)?;
        let gs = nearest_point_selection(&sys.g_map, &u, &y, &g)?;
        let node_f: Vec<f64> = f.values().iter().zip(fs.path.values()).map(|(a, b)| linalg::dist(a, b)).collect();
        let node_g: Vec<f64> = g.values().iter().zip(gs.path.values()).map(|(a, b)| linalg::dist(a, b)).collect();
        let (rf, rg) = (l2_of(&node_f, step), l2_of(&node_g, step));
        history.push((rf, rg));
        let (mf, mg) = (max_of(&node_f), max_of(&node_g));
        let done = rf <= settings.tol && rg <= settings.tol && mf <= settings.tol && mg <= settings.tol;
        let blown = u.sup_norm() > BLOWUP_NORM || v.sup_norm() > BLOWUP_NORM;
        if done || blown || iterations >= settings.max_iter || theta < settings.theta_floor {
            let f_sel = SelectionPath { path: f, residuals: node_f };
            let g_sel = SelectionPath { path: g, residuals: node_g };
            let apriori = apriori_bound_check(&u, &v, &f_sel.path, &g_sel.path, params, sys.potential.mesh());
            let report = SolveReport {
                converged: done && !blown,
                iterations,
                residual_f: rf,
                residual_g: rg,
                max_node_residual_f: mf,
                max_node_residual_g: mg,
                history,
                theta,
                relaxation_contracts: contracts,
                apriori,
                window: *params,
            };
            return Ok(WindowSolution { u, v, f: f_sel, g: g_sel, report });
        }
        let total = rf.hypot(rg);
        if total > prev_total {
            theta *= 0.5;
        }
        prev_total = total;
        let f_next = f.lerp(&fs.path, theta)?;
        let g_next = g.lerp(&gs.path, theta)?;
        // node distance is convex, so the blend sits at most (1 − θ)·r away
        let nf = node_residuals(&sys.f_map, &u, &y, &f_next)?;
        let ng = node_residuals(&sys.g_map, &u, &y, &g_next)?;
        let ok = |after: &[f64], before: &[f64]| {
            after.iter().zip(before).all(|(a, b)| *a <= (1.0 - theta) * b + 1e-12 * (1.0 + b))
        };
        contracts &= ok(&nf, &node_f) && ok(&ng, &node_g);
        f = f_next;
        g = g_next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalSettings {
    pub horizon: f64,
    /// Total number of uniform time steps.
    pub steps: usize,
    /// Cap on window lengths.
    pub max_window: f64,
    pub solver: SolverSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub u: TimePath,
    pub v: TimePath,
    pub f: SelectionPath,
    pub g: SelectionPath,
    pub windows: Vec<SolveReport>,
    /// `(start, end)` of each window.
    pub spans: Vec<(f64, f64)>,
    pub converged: bool,
    pub failed_window: Option<usize>,
    pub blow_up: bool,
}

fn join(paths: &[TimePath]) -> Result<TimePath> {
    let mut values = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let take = if i + 1 == paths.len() { p.len() } else { p.len() - 1 };
        values.extend(p.values()[..take].iter().cloned());
    }
    TimePath::new(paths[0].t0(), paths.last().unwrap().t1(), values)
}

fn join_residuals(sels: &[SelectionPath]) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, s) in sels.iter().enumerate() {
        let take = if i + 1 == sels.len() { s.residuals.len() } else { s.residuals.len() - 1 };
        out.extend_from_slice(&s.residuals[..take]);
    }
    out
}

/// Windows of the relaxed iteration chained until `horizon`, each started
/// from the terminal state of the previous one with `β` reset to the
/// current state bound.
pub fn solve_global(sys: &CoupledSystem, u0: &[f64], v0: &GridFunction, settings: &GlobalSettings) -> Result<GlobalSolution> {
    if settings.steps == 0 || !(settings.horizon > 0.0) {
        return Err(Error::invalid("need a positive horizon and at least one step"));
    }
    let tau = settings.horizon / settings.steps as f64;
    let (f_env, g_env) = sys.envelopes()?;
    let c_tilde = sys.generator.bound();
    let mut u_cur = u0.to_vec();
    let mut v_cur = v0.clone();
    let mut done_steps = 0;
    let mut parts: Vec<WindowSolution> = Vec::new();
    let mut spans = Vec::new();
    let mut failed_window = None;
    let mut blow_up = false;
    while done_steps < settings.steps {
        let beta = linalg::norm(&u_cur).max(v_cur.norm());
        let params = compute_window(c_tilde, beta, f_env, g_env, settings.max_window)?;
        let fit = ((params.t0 / tau) * (1.0 + 1e-12)).floor() as usize;
        let n = fit.min(settings.steps - done_steps);
        if n == 0 {
            return Err(Error::pre(format!(
                "window length T0 = {} is shorter than the time step {tau}",
                params.t0
            )));
        }
        let t_start = done_steps as f64 * tau;
        let end_steps = done_steps + n;
        let t_end = if end_steps == settings.steps {
            settings.horizon
        } else {
            end_steps as f64 * tau
        };
        let part = solve_window(sys, &u_cur, &v_cur, t_start, t_end, n + 1, &params, &settings.solver)?;
        spans.push((t_start, t_end));
        let ok = part.report.converged;
        u_cur = part.u.last().to_vec();
        v_cur = GridFunction::new(part.v.last().to_vec())?;
        blow_up = part.u.sup_norm() > BLOWUP_NORM || part.v.sup_norm() > BLOWUP_NORM;
        parts.push(part);
        done_steps = end_steps;
        if !ok {
            failed_window = Some(parts.len() - 1);
            break;
        }
        if blow_up {
            break;
        }
    }
    let u = join(&parts.iter().map(|p| p.u.clone()).collect::<Vec<_>>())?;
    let v = join(&parts.iter().map(|p| p.v.clone()).collect::<Vec<_>>())?;
    let fs: Vec<SelectionPath> = parts.iter().map(|p| p.f.clone()).collect();
    let gs: Vec<SelectionPath> = parts.iter().map(|p| p.g.clone()).collect();
    let f = SelectionPath {
        path: join(&fs.iter().map(|s| s.path.clone()).collect::<Vec<_>>())?,
        residuals: join_residuals(&fs),
    };
    let g = SelectionPath {
        path: join(&gs.iter().map(|s| s.path.clone()).collect::<Vec<_>>())?,
        residuals: join_residuals(&gs),
    };
    Ok(GlobalSolution {
        u,
        v,
        f,
        g,
        windows: parts.into_iter().map(|p| p.report).collect(),
        spans,
        converged: failed_window.is_none() && !blow_up && done_steps == settings.steps,
        failed_window,
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{CoefficientProfile, ExponentProfile};
    use crate::rhs::Expr;
    use crate::semigroup::GeneratorKind;

    fn system(f_map: BasisFamilyMap, g_map: BasisFamilyMap) -> CoupledSystem {
        let gen = SpectralGenerator::new(GeneratorKind::Heat, 4).unwrap();
        let pot = VariableExponentPotential::new(
            7,
            ExponentProfile::Constant { value: 3.0 },
            CoefficientProfile::TwoMinusT,
            1.5,
            false,
        )
        .unwrap();
        CoupledSystem::new(gen, pot, f_map, g_map).unwrap()
    }

    #[test]
    fn window_examples() {
        let z = GrowthEnvelope::ZERO;
        assert_eq!(compute_window(1.0, 2.0, z, z, 1.0).unwrap().m, 3.0);
        let c = GrowthEnvelope::new(0.0, 0.0, 6.0).unwrap();
        let w = compute_window(1.0, 2.0, c, z, 10.0).unwrap();
        assert_eq!(w.r, 6.0);
        assert!((w.t0 - 0.25).abs() < 1e-14);
        let w = compute_window(1.0, 2.0, c, z, 0.1).unwrap();
        assert_eq!(w.t0, 0.1);
        assert!(compute_window(1.0, 1.0, GrowthEnvelope { a: f64::INFINITY, b: 0.0, c: 0.0 }, z, 1.0).is_err());
    }

    #[test]
    fn singleton_maps_converge_immediately() {
        let sys = system(
            BasisFamilyMap::singleton(&[0.5, 0.0, -0.25, 0.0]).unwrap(),
            BasisFamilyMap::singleton(&[0.1; 7]).unwrap(),
        );
        let u0 = vec![0.3, 0.0, 0.1, 0.0];
        let v0 = GridFunction::from_fn(7, |x| x * (1.0 - x)).unwrap();
        let beta = linalg::norm(&u0).max(v0.norm());
        let (fe, ge) = sys.envelopes().unwrap();
        let w = compute_window(1.0, beta, fe, ge, 0.5).unwrap();
        let out = solve_window(&sys, &u0, &v0, 0.0, w.t0, 33, &w, &SolverSettings::default()).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.report.iterations, 1);
        assert!(out.report.apriori.pass && out.report.apriori.in_selection_ball);
    }

    #[test]
    fn small_growth_map_converges() {
        let f = BasisFamilyMap::growth(4, vec![0.2, 0.1], vec![Expr::constant(0.05), Expr::Sin { arg: Box::new(Expr::NormV) }])
            .unwrap();
        let g = BasisFamilyMap::new(
            BasisFamilyMap::canonical_directions(7, 1).unwrap(),
            vec![crate::rhs::Coefficient::Growth {
                c: 0.3,
                readout: Some(linalg::unit(4, 0)),
                nu: Expr::constant(0.1),
            }],
            true,
        )
        .unwrap();
        let sys = system(f, g);
        let settings = GlobalSettings { horizon: 1.0, steps: 64, max_window: 0.5, solver: SolverSettings::default() };
        let u0 = vec![1.0, 0.5, 0.0, 0.0];
        let v0 = GridFunction::from_fn(7, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let sol = solve_global(&sys, &u0, &v0, &settings).unwrap();
        assert!(sol.converged, "{:?}", sol.windows.last().map(|w| &w.history));
        assert_eq!(sol.u.len(), 65);
        assert!(sol.windows.iter().all(|w| w.apriori.pass && w.relaxation_contracts));
    }
}
