//! Property batteries behind `setflow verify` and `setflow lemma`.
//!
//! Every check reports the smallest margin `bound − observed` over its
//! trials, so a nonnegative margin means the property held everywhere.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::flow::{
    complete_continuity_probe, monotonicity_probe, prox_step, solve_monotone_ivp, CoefficientProfile, ExponentProfile,
    GridFunction, VariableExponentPotential,
};
use crate::geometry::{
    hausdorff_distance, intersection_continuity_probe, project_polytope, projection_difference_check,
    slater_intersection_check, ConvexBody, Polytope, ProjectionSettings,
};
use crate::linalg;
use crate::rhs::{BasisFamilyMap, Coefficient, Expr, ModulusPair};
use crate::sampling::{point_in_ball, trial_rng, unit_vector};
use crate::selection::{approximate_selection, nearest_point_selection, node_residuals, path_l2_norm, TimePath};
use crate::semigroup::{
    counterexample_norm, counterexample_profile, counterexample_tail_bound, duhamel_solve, log_spaced, GeneratorKind,
    SpectralGenerator,
};
use crate::solver::{
    compute_window, elementary_bound_probe, gronwall_check, gronwall_constants, solve_global, solve_window,
    yosida_stability_check, CoupledSystem, GlobalSolution, SolverSettings,
};

pub const HEAT_PRESET: &str = include_str!("../../presets/heat_debye.json");
pub const SCHRODINGER_PRESET: &str = include_str!("../../presets/schrodinger_debye.json");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub tag: String,
    pub trials: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(tag: &str, trials: usize, worst_margin: f64) -> Self {
        CheckLine { tag: tag.to_string(), trials, worst_margin, pass: worst_margin >= 0.0 }
    }

    pub fn render(&self) -> String {
        format!(
            "{:<28} trials={:>5} worst_margin={:+.6e} {}",
            self.tag,
            self.trials,
            self.worst_margin,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Seed and trial-count override shared by all checks.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: Option<usize>,
}

impl SuiteOptions {
    fn n(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    /// Independent stream per (check, trial).
    fn rng(&self, check: u64, trial: usize) -> ChaCha8Rng {
        trial_rng(self.seed ^ check.wrapping_mul(0x9E37_79B9_7F4A_7C15), trial as u64)
    }
}

fn min_margin(m: impl IntoIterator<Item = f64>) -> f64 {
    m.into_iter().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NEG_INFINITY } else { a.min(b) })
}

fn random_polytope(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, k: usize) -> Result<Polytope> {
    Polytope::new((0..k).map(|_| point_in_ball(rng, center, radius)).collect())
}

fn random_body(rng: &mut ChaCha8Rng, d: usize) -> Result<ConvexBody> {
    let center = point_in_ball(rng, &vec![0.0; d], 1.0);
    match rng.gen_range(0..3) {
        0 => ConvexBody::ball(center, rng.gen_range(0.2..1.5)),
        1 => {
            let k = rng.gen_range(d + 1..=d + 6);
            Ok(random_polytope(rng, &center, 1.0, k)?.into())
        }
        _ => loop {
            let r = rng.gen_range(0.5..1.2);
            let k = rng.gen_range(d + 1..=d + 5);
            let offset = point_in_ball(rng, &center, 0.5);
            let verts: Vec<Vec<f64>> = (0..k).map(|_| point_in_ball(rng, &offset, 1.0)).collect();
            if let Ok(b) = ConvexBody::ball_cap(center.clone(), r, verts) {
                break Ok(b);
            }
        },
    }
}

// convex

fn projection_nonexpansive(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(200);
    let mut margins = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = o.rng(1, i);
        let d = rng.gen_range(2..=3);
        let body = random_body(&mut rng, d)?;
        let x = point_in_ball(&mut rng, &vec![0.0; d], 3.0);
        let y = point_in_ball(&mut rng, &vec![0.0; d], 3.0);
        let lhs = linalg::dist(&body.project(&x)?, &body.project(&y)?);
        margins.push(linalg::dist(&x, &y) + 1e-8 - lhs);
    }
    Ok(CheckLine::new("projection_nonexpansive", n, min_margin(margins)))
}

fn projection_certificate(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(200);
    let mut margins = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = o.rng(2, i);
        let d = rng.gen_range(2..=5);
        let k = rng.gen_range(2..=12);
        let p = random_polytope(&mut rng, &vec![0.0; d], 1.0, k)?;
        let x = point_in_ball(&mut rng, &vec![0.0; d], 3.0);
        let out = project_polytope(&x, &p, ProjectionSettings::default())?;
        // recompute the certificate over the vertices independently
        let r = linalg::sub(&x, &out.point);
        let gap = p
            .vertices()
            .iter()
            .map(|v| linalg::dot(&r, &linalg::sub(v, &out.point)))
            .fold(f64::NEG_INFINITY, f64::max);
        margins.push(1e-10 * (1.0 + linalg::norm(&x)) - gap);
    }
    Ok(CheckLine::new("projection_certificate", n, min_margin(margins)))
}

fn hausdorff_metric(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(100);
    let mut margins = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = o.rng(3, i);
        let d = rng.gen_range(2..=3);
        let mut poly = || -> Result<ConvexBody> {
            let c = point_in_ball(&mut rng, &vec![0.0; d], 1.0);
            Ok(random_polytope(&mut rng, &c, 1.0, d + 3)?.into())
        };
        let (a, b, c) = (poly()?, poly()?, poly()?);
        let hd = |x: &ConvexBody, y: &ConvexBody| hausdorff_distance(x, y, 64).map(|h| h.upper);
        let ab = hd(&a, &b)?;
        let shift = point_in_ball(&mut rng, &vec![0.0; d], 5.0);
        let (pa, pb) = match (&a, &b) {
            (ConvexBody::Polytope(pa), ConvexBody::Polytope(pb)) => (pa.translate(&shift)?, pb.translate(&shift)?),
            _ => unreachable!(),
        };
        let moved = hd(&pa.into(), &pb.into())?;
        let scale = 1e-12 * (1.0 + ab);
        margins.push(scale - (ab - hd(&b, &a)?).abs());
        margins.push(scale - hd(&a, &a)?);
        margins.push(ab + hd(&b, &c)? + scale - hd(&a, &c)?);
        margins.push(1e-12 * (1.0 + ab + linalg::norm(&shift)) - (moved - ab).abs());
    }
    Ok(CheckLine::new("hausdorff_metric", n, min_margin(margins)))
}

/// Random pair `C`, `D` in `ℝ³` with the common bound `R`, and a point `x`.
pub fn projection_difference_trial(seed: u64, index: usize) -> Result<crate::geometry::BoundCheck> {
    let mut rng = trial_rng(seed, index as u64);
    let center = point_in_ball(&mut rng, &[0.0; 3], 1.0);
    let c: ConvexBody = if rng.gen_bool(0.5) {
        {
            let k = rng.gen_range(4..=8);
            random_polytope(&mut rng, &center, 1.0, k)?.into()
        }
    } else {
        ConvexBody::ball(center.clone(), rng.gen_range(0.3..1.0))?
    };
    let scale: f64 = 10f64.powf(rng.gen_range(-4.0..0.0));
    let d: ConvexBody = match &c {
        ConvexBody::Polytope(p) => Polytope::new(
            p.vertices().iter().map(|v| point_in_ball(&mut rng, v, scale)).collect(),
        )?
        .into(),
        ConvexBody::Ball(b) => {
            let shifted = point_in_ball(&mut rng, b.center(), scale);
            ConvexBody::ball(shifted, (b.radius() + rng.gen_range(-scale..scale)).max(0.05))?
        }
        _ => unreachable!(),
    };
    let bound = c.norm_bound().max(d.norm_bound());
    let x = point_in_ball(&mut rng, &[0.0; 3], 4.0);
    projection_difference_check(&x, &c, &d, bound, 128)
}

fn projection_difference(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(1000);
    let margins: Result<Vec<f64>> = (0..n).map(|i| Ok(projection_difference_trial(o.seed, i)?.margin())).collect();
    Ok(CheckLine::new("projection_difference_bound", n, min_margin(margins?)))
}

/// Random Slater configuration `x0 ∈ A`, `B[x0, ρ] ⊆ B` in two or three
/// dimensions, with a query point `x`.
pub fn slater_trial(seed: u64, index: usize) -> Result<crate::geometry::BoundCheck> {
    let mut rng = trial_rng(seed, index as u64);
    let d = rng.gen_range(2..=3);
    let x0 = point_in_ball(&mut rng, &vec![0.0; d], 1.0);
    let k = rng.gen_range(d + 1..=d + 4);
    // A is the hull of x0 and random points, so x0 ∈ A
    let mut verts = vec![x0.clone()];
    verts.extend((1..k).map(|_| point_in_ball(&mut rng, &x0, 1.5)));
    let a: ConvexBody = Polytope::new(verts)?.into();
    let rho = rng.gen_range(0.05..0.5);
    let b: ConvexBody = if rng.gen_bool(0.5) {
        let shift = point_in_ball(&mut rng, &vec![0.0; d], 1.0);
        let centre = linalg::add(&x0, &shift);
        ConvexBody::ball(centre, rho + linalg::norm(&shift) + rng.gen_range(0.0..0.5))?
    } else {
        // box around x0 with half-widths beyond rho
        let lo: Vec<f64> = (0..d).map(|_| rng.gen_range(1.05..2.0) * rho).collect();
        let hi: Vec<f64> = (0..d).map(|_| rng.gen_range(1.05..2.0) * rho).collect();
        let mut corners = Vec::new();
        for mask in 0..(1usize << d) {
            corners.push(
                (0..d)
                    .map(|j| if mask >> j & 1 == 1 { x0[j] + hi[j] } else { x0[j] - lo[j] })
                    .collect(),
            );
        }
        Polytope::new(corners)?.into()
    };
    let x = point_in_ball(&mut rng, &vec![0.0; d], 4.0);
    slater_intersection_check(&x, &a, &b, &x0, rho, 128)
}

fn slater_bound(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(500);
    let margins: Result<Vec<f64>> = (0..n).map(|i| Ok(slater_trial(o.seed, i)?.margin())).collect();
    Ok(CheckLine::new("slater_intersection_bound", n, min_margin(margins?)))
}

/// Ten convergent families `B[cₙ, r] ∩ Bₙ → B[c, r] ∩ B` in the plane with
/// perturbations of size `2⁻ⁿ`; returns, per family, the probe value at the
/// derived index for the target `1e-2` (infinite if no index qualifies).
pub fn continuity_families(length: usize, resolution: usize) -> Result<Vec<f64>> {
    let shapes: Vec<(Vec<Vec<f64>>, Vec<f64>, f64)> = vec![
        (vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], vec![1.2, 0.5], 0.5),
        (vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], vec![0.5, 0.5], 0.3),
        (vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.2], 0.6),
        (vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![0.0, 1.0]], vec![0.0, 1.3], 0.5),
        (vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![3.0, 0.5], vec![0.0, 0.5]], vec![1.5, 0.8], 0.6),
        (vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.1], 0.3),
        (
            (0..6)
                .map(|k| {
                    let a = std::f64::consts::PI * k as f64 / 3.0;
                    vec![a.cos(), a.sin()]
                })
                .collect(),
            vec![0.9, 0.0],
            0.4,
        ),
        (vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![0.3, 1.0]], vec![0.4, 0.4], 1.0),
        (vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.5], vec![0.0, 0.5]], vec![-0.2, 0.25], 0.35),
        (vec![vec![-2.0, 0.0], vec![2.0, 0.0], vec![0.0, 0.3]], vec![0.0, -0.2], 0.5),
    ];
    let mut out = Vec::with_capacity(shapes.len());
    for (f, (verts, c, r)) in shapes.into_iter().enumerate() {
        let b = Polytope::new(verts.clone())?;
        let angle = 0.7 * f as f64 + 0.3;
        let dir = [angle.cos(), angle.sin()];
        let mut c_seq = Vec::with_capacity(length);
        let mut b_seq = Vec::with_capacity(length);
        for n in 0..length {
            let e = 0.5f64.powi(n as i32 + 1);
            c_seq.push(vec![c[0] + 0.3 * e * dir[0], c[1] + 0.3 * e * dir[1]]);
            // alternate translated and dilated perturbations of B
            let bn = if f % 2 == 0 {
                b.translate(&[-0.2 * e * dir[1], 0.2 * e * dir[0]])?
            } else {
                Polytope::new(verts.iter().map(|v| linalg::scale(v, 1.0 + 0.2 * e)).collect())?
            };
            b_seq.push(bn);
        }
        let probe = intersection_continuity_probe(&c_seq, &b_seq, r, &c, &b, resolution)?;
        if !probe.hypothesis_holds {
            return Err(Error::invalid(format!("family {f} violates the open-ball hypothesis")));
        }
        out.push(match probe.derived_index(1e-2) {
            Some(n) => probe.values[n],
            None => f64::INFINITY,
        });
    }
    Ok(out)
}

fn intersection_continuity(_o: &SuiteOptions) -> Result<CheckLine> {
    let values = continuity_families(16, 2048)?;
    Ok(CheckLine::new("intersection_continuity", values.len(), min_margin(values.iter().map(|v| 1e-2 - v))))
}

// selection and right-hand sides

fn random_map(rng: &mut ChaCha8Rng, dim: usize) -> Result<BasisFamilyMap> {
    let k = rng.gen_range(1..=dim);
    let mut coefs = Vec::with_capacity(k);
    for _ in 0..k {
        let dir_u = unit_vector(rng, dim);
        let amp = rng.gen_range(0.2..1.5);
        coefs.push(Coefficient::General(Expr::Sum {
            terms: vec![
                Expr::constant(rng.gen_range(-1.0..1.0)),
                Expr::Affine {
                    scale: amp,
                    shift: 0.0,
                    arg: Box::new(Expr::Sin { arg: Box::new(Expr::InnerU { dir: dir_u }) }),
                },
                Expr::Affine {
                    scale: 0.3,
                    shift: 0.0,
                    arg: Box::new(Expr::Tanh { arg: Box::new(Expr::NormV) }),
                },
            ],
        }));
    }
    BasisFamilyMap::new(BasisFamilyMap::canonical_directions(dim, k)?, coefs, rng.gen_bool(0.5))
}

fn random_path(rng: &mut ChaCha8Rng, t1: f64, nodes: usize, dim: usize, amp: f64) -> Result<TimePath> {
    let a = point_in_ball(rng, &vec![0.0; dim], amp);
    let b = point_in_ball(rng, &vec![0.0; dim], amp);
    let w = rng.gen_range(1.0..6.0);
    TimePath::from_fn(0.0, t1, nodes, |t| linalg::axpy(&a, (w * t).sin(), &b))
}

/// One instance of moving a selection from `F(u_old, v)` to `F(u_new, v)`:
/// returns `(‖f_new − f‖_{L²}, ε√T, max residual)`, or `None` when some
/// node has `B[f, ε] ∩ F(u_new, v) = ∅`.
pub fn selection_transfer_trial(seed: u64, index: usize) -> Result<Option<(f64, f64, f64)>> {
    let mut rng = trial_rng(seed, index as u64);
    let dim = rng.gen_range(2..=3);
    let map = random_map(&mut rng, dim)?;
    let t1 = rng.gen_range(0.5..2.0);
    let nodes = 33;
    let u_old = random_path(&mut rng, t1, nodes, dim, 1.0)?;
    let v = random_path(&mut rng, t1, nodes, 2, 1.0)?;
    let anchor = random_path(&mut rng, t1, nodes, dim, 2.0)?;
    let f = nearest_point_selection(&map, &u_old, &v, &anchor)?;
    let delta = 10f64.powf(rng.gen_range(-3.0..-0.5));
    let bump = random_path(&mut rng, t1, nodes, dim, delta)?;
    let u_new = u_old.map(|x| x.to_vec())?;
    let u_new = TimePath::new(
        0.0,
        t1,
        u_new.values().iter().zip(bump.values()).map(|(a, b)| linalg::add(a, b)).collect(),
    )?;
    let eps = rng.gen_range(0.05..0.5);
    match approximate_selection(&map, &u_new, &v, &f, eps) {
        Ok(fnew) => {
            let d = path_l2_norm(&fnew.path.sub(&f.path)?);
            Ok(Some((d, eps * t1.sqrt(), fnew.max_residual())))
        }
        Err(Error::Selection { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn selection_transfer(o: &SuiteOptions) -> Result<CheckLine> {
    let n = o.n(100);
    let mut margins = Vec::new();
    let mut used = 0;
    for i in 0..n {
        if let Some((d, bound, res)) = selection_transfer_trial(o.seed, i)? {
            used += 1;
            margins.push(bound + 1e-6 - d);
            margins.push(1e-8 - res);
        }
    }
    Ok(CheckLine::new("selection_transfer_bound", used, min_margin(margins)))
}

fn selection_validity_and_convexity(o: &SuiteOptions) -> Result<(CheckLine, CheckLine)> {
    let n = o.n(100);
    let (mut valid, mut convex) = (Vec::new(), Vec::new());
    for i in 0..n {
        let mut rng = o.rng(7, i);
        let dim = rng.gen_range(2..=4);
        let map = random_map(&mut rng, dim)?;
        let u = random_path(&mut rng, 1.0, 17, dim, 1.0)?;
        let v = random_path(&mut rng, 1.0, 17, 3, 1.0)?;
        let a1 = random_path(&mut rng, 1.0, 17, dim, 2.0)?;
        let a2 = random_path(&mut rng, 1.0, 17, dim, 2.0)?;
        let s1 = nearest_point_selection(&map, &u, &v, &a1)?;
        let s2 = nearest_point_selection(&map, &u, &v, &a2)?;
        valid.push(1e-8 - s1.max_residual().max(s2.max_residual()));
        let theta = rng.gen_range(0.0..=1.0);
        let blend = s2.path.lerp(&s1.path, theta)?;
        let r = node_residuals(&map, &u, &v, &blend)?;
        convex.push(1e-8 - r.iter().cloned().fold(0.0, f64::max));
    }
    Ok((
        CheckLine::new("selection_validity", n, min_margin(valid)),
        CheckLine::new("selection_convexity", n, min_margin(convex)),
    ))
}

fn growth_map(rng: &mut ChaCha8Rng, dim: usize) -> Result<BasisFamilyMap> {
    let k = rng.gen_range(1..=dim);
    let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let nu: Vec<Expr> = (0..k)
        .map(|_| Expr::Affine {
            scale: rng.gen_range(-1.0..1.0),
            shift: 0.0,
            arg: Box::new(Expr::Sin { arg: Box::new(Expr::NormV) }),
        })
        .collect();
    BasisFamilyMap::growth(dim, c, nu)
}

fn rhs_checks(o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let n = o.n(200);
    let (mut env, mut orth, mut cont) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let mut rng = o.rng(8, i);
        let dim = rng.gen_range(2..=5);
        let map = growth_map(&mut rng, dim)?;
        let u = point_in_ball(&mut rng, &vec![0.0; dim], 5.0);
        let v = point_in_ball(&mut rng, &vec![0.0; 3], 5.0);
        let g = map.growth_check(&u, &v)?;
        env.push(g.envelope_value * (1.0 + 1e-12) - g.max_vertex_norm);

        // move u orthogonally to every readout direction
        let mut w = point_in_ball(&mut rng, &vec![0.0; dim], 3.0);
        let dirs: Vec<Vec<f64>> = map.directions().to_vec();
        for d in &dirs {
            let s = linalg::dot(&w, d);
            w = linalg::axpy(&w, -s, d);
        }
        let moved = linalg::add(&u, &w);
        let a = map.vertices(&u, &v)?;
        let b = map.vertices(&moved, &v)?;
        let diff = a
            .iter()
            .zip(&b)
            .map(|(x, y)| linalg::dist(x, y))
            .fold(0.0, f64::max);
        orth.push(1e-12 * (1.0 + linalg::norm(&u) + linalg::norm(&w)) - diff);

        let radius = linalg::norm(&u).max(linalg::norm(&v)) + 1.0;
        let lip = map.hausdorff_lipschitz(radius).unwrap_or(f64::INFINITY);
        let pairs: Vec<ModulusPair> = (1..=8)
            .map(|k| {
                let s = 0.5f64.powi(2 * k);
                ModulusPair {
                    u: u.clone(),
                    v: v.clone(),
                    u2: linalg::axpy(&u, s, &unit_vector(&mut rng, dim)),
                    v2: linalg::axpy(&v, s, &unit_vector(&mut rng, 3)),
                }
            })
            .collect();
        for (input, dhd) in map.hausdorff_modulus_probe(&pairs)? {
            cont.push(lip * input + 1e-12 - dhd);
        }
    }
    Ok(vec![
        CheckLine::new("growth_envelope", n, min_margin(env)),
        CheckLine::new("readout_orthogonality", n, min_margin(orth)),
        CheckLine::new("hausdorff_continuity", n, min_margin(cont)),
    ])
}

// semigroup

const KINDS: [GeneratorKind; 3] = [GeneratorKind::Heat, GeneratorKind::Schroedinger, GeneratorKind::Wave1D];

fn semigroup_checks(o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let n = o.n(100);
    let (mut law, mut norm, mut lin) = (Vec::new(), Vec::new(), Vec::new());
    for (k, kind) in KINDS.iter().enumerate() {
        for i in 0..n {
            let mut rng = o.rng(10 + k as u64, i);
            let g = SpectralGenerator::new(*kind, rng.gen_range(1..=32))?;
            let x = point_in_ball(&mut rng, &vec![0.0; g.dim()], 2.0);
            let (t, s) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            let lhs = g.propagate(&x, t + s)?;
            let rhs = g.propagate(&g.propagate(&x, s)?, t)?;
            let scale = 1e-12 * (1.0 + linalg::norm(&x));
            law.push(scale - linalg::dist(&lhs, &rhs));
            law.push(scale - linalg::dist(&g.propagate(&x, 0.0)?, &x));
            let nt = linalg::norm(&g.propagate(&x, t)?);
            let nx = linalg::norm(&x);
            norm.push(match kind {
                GeneratorKind::Heat => nx + scale - nt,
                _ => scale - (nt - nx).abs(),
            });
            if i < n.min(20) {
                let f1 = random_path(&mut rng, 1.0, 33, g.dim(), 1.0)?;
                let f2 = random_path(&mut rng, 1.0, 33, g.dim(), 1.0)?;
                let both = TimePath::new(
                    0.0,
                    1.0,
                    f1.values().iter().zip(f2.values()).map(|(a, b)| linalg::add(a, b)).collect(),
                )?;
                let whole = duhamel_solve(&g, &x, &both)?;
                let a = duhamel_solve(&g, &x, &f1)?;
                let b = duhamel_solve(&g, &vec![0.0; g.dim()], &f2)?;
                let err = whole
                    .values()
                    .iter()
                    .zip(a.values().iter().zip(b.values()))
                    .map(|(w, (p, q))| linalg::dist(w, &linalg::add(p, q)))
                    .fold(0.0, f64::max);
                lin.push(1e-10 - err);
            }
        }
    }
    let mut yos = Vec::new();
    let yt = o.n(100).min(30);
    for (k, kind) in KINDS.iter().enumerate() {
        for i in 0..yt {
            let mut rng = o.rng(20 + k as u64, i);
            let g = SpectralGenerator::new(*kind, rng.gen_range(1..=16))?;
            let t0 = rng.gen_range(0.2..2.0);
            let f = random_path(&mut rng, t0, 65, g.dim(), 1.0)?;
            let u0 = point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0);
            for p in yosida_stability_check(&g, &f, &[0.5, 2.0, 10.0, 100.0, 1000.0], &u0)? {
                yos.push(p.rhs * (1.0 + 1e-10) + 1e-14 - p.lhs);
            }
        }
    }
    let mut trunc = Vec::new();
    for &t in &log_spaced(1e-4, 1.0, 9) {
        for &modes in &[50usize, 200, 1000] {
            // modes N+1..2N add at most |e^{iθ} − 1|² ≤ 4 times the tail of Σ aₙ²
            let (a, b) = (counterexample_norm(modes, t), counterexample_norm(2 * modes, t));
            let grow = b * b - a * a;
            trunc.push((4.0 * counterexample_tail_bound(modes) - grow).min(grow + 1e-15));
        }
    }
    let profile = counterexample_profile(2000, &log_spaced(1e-4, 1e-2, 25))?;
    let slope = profile.slope.unwrap_or(f64::NAN);
    Ok(vec![
        CheckLine::new("semigroup_law", 3 * n, min_margin(law)),
        CheckLine::new("semigroup_norm", 3 * n, min_margin(norm)),
        CheckLine::new("duhamel_linearity", lin.len(), min_margin(lin)),
        CheckLine::new("yosida_estimate", yos.len(), min_margin(yos)),
        CheckLine::new("mode_truncation", trunc.len(), min_margin(trunc)),
        CheckLine::new("counterexample_slope", 1, 0.1 - (slope - 0.5).abs()),
    ])
}

// monotone flow

fn random_potential(rng: &mut ChaCha8Rng) -> Result<VariableExponentPotential> {
    let j = [7, 15, 31][rng.gen_range(0..3)];
    let exponent = match rng.gen_range(0..3) {
        0 => ExponentProfile::Constant { value: rng.gen_range(2.2..4.0) },
        1 => ExponentProfile::LinearRamp { from: rng.gen_range(2.2..4.0), to: rng.gen_range(2.2..4.0) },
        _ => ExponentProfile::Bump { base: rng.gen_range(2.2..3.0), height: rng.gen_range(0.0..1.0) },
    };
    let coefficient = match rng.gen_range(0..3) {
        0 => CoefficientProfile::Constant { value: rng.gen_range(0.5..2.0) },
        1 => CoefficientProfile::TwoMinusT,
        _ => CoefficientProfile::Separable {
            decay: rng.gen_range(0.0..1.0),
            base: rng.gen_range(0.6..1.5),
            amplitude: rng.gen_range(0.0..0.5),
        },
    };
    VariableExponentPotential::new(j, exponent, coefficient, 1.0, false)
}

fn random_grid(rng: &mut ChaCha8Rng, j: usize, amp: f64) -> Result<GridFunction> {
    let a = rng.gen_range(-amp..amp);
    let b = rng.gen_range(-amp..amp);
    let k = rng.gen_range(1..4) as f64 * std::f64::consts::PI;
    let noise: Vec<f64> = (0..j).map(|_| rng.gen_range(-0.1 * amp..0.1 * amp)).collect();
    GridFunction::from_fn(j, |x| a * (k * x).sin() + b * x * (1.0 - x))
        .and_then(|g| GridFunction::new(linalg::add(g.values(), &noise)))
}

fn monotone_checks(o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let n = o.n(100);
    let (mut grad, mut prox, mut diss, mut apriori, mut mono) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let mut rng = o.rng(30, i);
        let pot = random_potential(&mut rng)?;
        let j = pot.nodes();
        let h = pot.mesh();
        let t = rng.gen_range(0.0..1.0);
        let v = random_grid(&mut rng, j, 2.0)?;

        let a = pot.subgradient(t, &v)?;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..j {
            let delta = 1e-5 * (1.0 + v.values()[k].abs());
            let mut plus = v.values().to_vec();
            let mut minus = v.values().to_vec();
            plus[k] += delta;
            minus[k] -= delta;
            let fd = (pot.energy(t, &GridFunction::new(plus)?)? - pot.energy(t, &GridFunction::new(minus)?)?) / (2.0 * delta);
            err = err.max((fd - h * a.values()[k]).abs());
            scale = scale.max((h * a.values()[k]).abs());
        }
        grad.push(1e-5 * (scale + 1e-8) - err);

        let w = random_grid(&mut rng, j, 2.0)?;
        let zero = GridFunction::zeros(j)?;
        let tau = rng.gen_range(0.01..0.2);
        let pv = prox_step(&pot, t, &v, &zero, tau)?;
        let pw = prox_step(&pot, t, &w, &zero, tau)?;
        let dpv = GridFunction::new(linalg::sub(pv.values(), pw.values()))?;
        let dvw = GridFunction::new(linalg::sub(v.values(), w.values()))?;
        prox.push(dvw.norm() + 1e-9 - dpv.norm());

        for _ in 0..10 {
            let x = random_grid(&mut rng, j, 3.0)?;
            let y = random_grid(&mut rng, j, 3.0)?;
            mono.push(monotonicity_probe(&pot, t, &x, &y)? + 1e-12);
        }

        if i < n.min(25) {
            let steps = 32;
            let zeros = TimePath::constant(0.0, 1.0, steps + 1, &vec![0.0; j])?;
            let sol = solve_monotone_ivp(&pot, &v, &zeros)?.path;
            for k in 0..steps {
                let e0 = pot.energy(sol.time(k), &GridFunction::new(sol.value(k).to_vec())?)?;
                let e1 = pot.energy(sol.time(k + 1), &GridFunction::new(sol.value(k + 1).to_vec())?)?;
                diss.push(1e-12 * (1.0 + e0.abs()) + e0 - e1);
            }
            let amp = rng.gen_range(0.1..3.0);
            let gpath = TimePath::from_fn(0.0, 1.0, steps + 1, |s| {
                (0..j).map(|m| amp * (3.0 * s + m as f64 * h).sin()).collect()
            })?;
            let sol = solve_monotone_ivp(&pot, &v, &gpath)?.path;
            let tau = gpath.step();
            let mut budget = v.norm();
            for k in 0..steps {
                let gbar = GridFunction::new(linalg::lerp(gpath.value(k), gpath.value(k + 1), 0.5))?;
                budget += tau * gbar.norm();
                let vk = GridFunction::new(sol.value(k + 1).to_vec())?;
                apriori.push(budget + 1e-9 - vk.norm());
            }
        }
    }

    let mut rng = o.rng(31, 0);
    let pot = random_potential(&mut rng)?;
    let j = pot.nodes();
    let v0 = random_grid(&mut rng, j, 1.0)?;
    let g = TimePath::constant(0.0, 1.0, 4097, &vec![0.5; j])?;
    let w = GridFunction::from_fn(j, |x| (std::f64::consts::PI * x).sin())?;
    let vals = complete_continuity_probe(&pot, &v0, &g, &w, 1.0, &[1, 4, 16, 64, 256])?;
    let decreasing = vals.windows(2).all(|p| p[1] < p[0]);
    let last = *vals.last().unwrap();
    let cc = if decreasing { 1e-3 - last } else { -1.0 };

    Ok(vec![
        CheckLine::new("gradient_consistency", n, min_margin(grad)),
        CheckLine::new("prox_nonexpansive", n, min_margin(prox)),
        CheckLine::new("energy_dissipation", n.min(25), min_margin(diss)),
        CheckLine::new("flow_apriori_bound", n.min(25), min_margin(apriori)),
        CheckLine::new("monotonicity", mono.len(), min_margin(mono)),
        CheckLine::new("complete_continuity", vals.len(), cc),
    ])
}

// coupled solver

/// Checks every window of a converged run: selection residuals, the a-priori
/// bound, `(f, g) ∈ M`, and the relaxation contraction; returns the
/// smallest margin.
pub fn run_margin(sol: &GlobalSolution, tol: f64) -> f64 {
    let mut m = Vec::new();
    m.push(if sol.converged { 0.0 } else { -1.0 });
    for w in &sol.windows {
        m.push(tol - w.max_node_residual_f.max(w.max_node_residual_g));
        m.push(w.apriori.bound + 1e-6 - w.apriori.state_sup);
        m.push(w.window.m + 1e-8 - w.apriori.norm_f.max(w.apriori.norm_g));
        m.push(if w.relaxation_contracts { 0.0 } else { -1.0 });
    }
    min_margin(m)
}

/// `‖u(t)‖ + ‖v(t)‖` along a solution, with `v` in the discrete norm.
pub fn trajectory_sums(sys: &CoupledSystem, sol: &GlobalSolution) -> Vec<f64> {
    let s = sys.potential.mesh().sqrt();
    sol.u.norms().iter().zip(sol.v.norms()).map(|(a, b)| a + s * b).collect()
}

fn solver_checks(o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();

    let n = o.n(100).min(20);
    let mut single = Vec::new();
    for i in 0..n {
        let mut rng = o.rng(40, i);
        let kind = KINDS[i % 3];
        let gen = SpectralGenerator::new(kind, rng.gen_range(1..=6))?;
        let pot = random_potential(&mut rng)?;
        let y_f = point_in_ball(&mut rng, &vec![0.0; gen.dim()], 1.0);
        let y_g = point_in_ball(&mut rng, &vec![0.0; pot.nodes()], 1.0);
        let sys = CoupledSystem::new(
            gen,
            pot.clone(),
            BasisFamilyMap::singleton(&y_f)?,
            BasisFamilyMap::singleton(&y_g)?,
        )?;
        let u0 = point_in_ball(&mut rng, &vec![0.0; gen.dim()], 1.0);
        let v0 = random_grid(&mut rng, pot.nodes(), 1.0)?;
        let beta = linalg::norm(&u0).max(v0.norm());
        let (fe, ge) = sys.envelopes()?;
        let w = compute_window(1.0, beta, fe, ge, 1.0)?;
        let out = solve_window(&sys, &u0, &v0, 0.0, w.t0, 17, &w, &SolverSettings::default())?;
        single.push(if out.report.converged && out.report.iterations == 1 { 0.0 } else { -1.0 });
    }
    lines.push(CheckLine::new("singleton_one_iteration", n, min_margin(single)));

    let mut preset_margins = Vec::new();
    let mut gron = Vec::new();
    let mut negative = Vec::new();
    for text in [HEAT_PRESET, SCHRODINGER_PRESET] {
        let config = ExperimentConfig::from_json(text)?;
        let exp = config.resolve()?;
        let sol = solve_global(&exp.system, &exp.u0, &exp.v0, &exp.settings)?;
        preset_margins.push(run_margin(&sol, exp.settings.solver.tol));
        let (fe, ge) = exp.system.envelopes()?;
        let c_tilde = exp.system.generator.bound();
        let (k, rho) = gronwall_constants(fe, ge, c_tilde, linalg::norm(&exp.u0), exp.v0.norm(), exp.settings.horizon);
        let sums = trajectory_sums(&exp.system, &sol);
        gron.push(gronwall_check(&sol.u.times(), &sums, k, rho).worst_margin + 1e-6);
    }
    lines.push(CheckLine::new("preset_solves", 2, min_margin(preset_margins)));
    lines.push(CheckLine::new("gronwall_envelope", 2, min_margin(gron)));

    // u' + Eu = 3⟨u, e₁⟩e₁ with u0 = e₁ grows like e^{2t}; a zero rate must fail
    let gen = SpectralGenerator::new(GeneratorKind::Heat, 2)?;
    let pot = VariableExponentPotential::new(
        7,
        ExponentProfile::Constant { value: 3.0 },
        CoefficientProfile::Constant { value: 1.0 },
        1.0,
        false,
    )?;
    let f_map = BasisFamilyMap::growth(2, vec![3.0], vec![Expr::constant(0.0)])?;
    let g_map = BasisFamilyMap::singleton(&[0.0; 7])?;
    let sys = CoupledSystem::new(gen, pot, f_map, g_map)?;
    let u0 = linalg::unit(2, 0);
    let v0 = GridFunction::zeros(7)?;
    let settings = crate::solver::GlobalSettings {
        horizon: 1.0,
        steps: 64,
        max_window: 1.0,
        solver: SolverSettings::default(),
    };
    let sol = solve_global(&sys, &u0, &v0, &settings)?;
    let (fe, ge) = sys.envelopes()?;
    let (k, rho) = gronwall_constants(fe, ge, 1.0, 1.0, 0.0, 1.0);
    let sums = trajectory_sums(&sys, &sol);
    let honest = gronwall_check(&sol.u.times(), &sums, k, rho);
    let control = gronwall_check(&sol.u.times(), &sums, k, 0.0);
    negative.push(if sol.converged && honest.pass && !control.pass { -control.worst_margin } else { -1.0 });
    lines.push(CheckLine::new("gronwall_negative_control", 1, min_margin(negative)));

    let n = o.n(100);
    let mut elem = Vec::new();
    for i in 0..n {
        let mut rng = o.rng(41, i);
        let pieces = rng.gen_range(1..=8);
        let h: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..5.0)).collect();
        let c = rng.gen_range(0.0..2.0);
        let r = elementary_bound_probe(c, &h, 1.0, 64, 4, o.seed.wrapping_add(i as u64))?;
        elem.push((1e-8 - r.closed_form_gap).min(1e-10 - r.worst_excess));
    }
    lines.push(CheckLine::new("elementary_bound", n, min_margin(elem)));
    Ok(lines)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Convex,
    Selection,
    Semigroup,
    Monotone,
    Solver,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LemmaProbe {
    /// Projection-difference bound against the Hausdorff distance.
    Projection,
    /// Distance to an intersection under a Slater condition.
    Slater,
    /// Continuity of ball-polytope intersections.
    Continuity,
}

pub fn run_suite(suite: Suite, o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Convex {
        lines.push(projection_nonexpansive(o)?);
        lines.push(projection_certificate(o)?);
        lines.push(hausdorff_metric(o)?);
        lines.push(projection_difference(o)?);
        lines.push(slater_bound(o)?);
        lines.push(intersection_continuity(o)?);
    }
    if all || suite == Suite::Selection {
        lines.push(selection_transfer(o)?);
        let (a, b) = selection_validity_and_convexity(o)?;
        lines.push(a);
        lines.push(b);
        lines.extend(rhs_checks(o)?);
    }
    if all || suite == Suite::Semigroup {
        lines.extend(semigroup_checks(o)?);
    }
    if all || suite == Suite::Monotone {
        lines.extend(monotone_checks(o)?);
    }
    if all || suite == Suite::Solver {
        lines.extend(solver_checks(o)?);
    }
    Ok(lines)
}

pub fn run_lemma(probe: LemmaProbe, o: &SuiteOptions) -> Result<Vec<CheckLine>> {
    Ok(vec![match probe {
        LemmaProbe::Projection => projection_difference(o)?,
        LemmaProbe::Slater => slater_bound(o)?,
        LemmaProbe::Continuity => intersection_continuity(o)?,
    }])
}
