//! Acceptance gate. Runs every criterion under its time limit and prints one
//! `PASS`/`FAIL` line each; exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use setflow::cli::suites::{
    continuity_families, projection_difference_trial, run_margin, selection_transfer_trial, slater_trial,
    trajectory_sums, HEAT_PRESET, SCHRODINGER_PRESET,
};
use setflow::cli::ExperimentConfig;
use setflow::flow::{
    monotonicity_probe, solve_monotone_ivp, CoefficientProfile, ExponentProfile, GridFunction, VariableExponentPotential,
};
use setflow::linalg;
use setflow::rhs::{BasisFamilyMap, Coefficient, Expr};
use setflow::sampling::{point_in_ball, trial_rng};
use setflow::selection::TimePath;
use setflow::semigroup::{
    counterexample_datum, counterexample_norm, counterexample_profile, duhamel_solve, log_spaced, GeneratorKind,
    SpectralGenerator,
};
use setflow::solver::{
    elementary_bound_probe, gronwall_check, gronwall_constants, solve_global, yosida_stability_check, CoupledSystem,
    GlobalSettings, SolverSettings,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const SEED: u64 = 7;

fn counterexample_order() -> Outcome {
    let t = log_spaced(1e-4, 1e-2, 25);
    let r = counterexample_profile(2000, &t).map_err(|e| e.to_string())?;
    let slope = r.slope.ok_or("no slope")?;
    ensure((0.4..=0.6).contains(&slope), format!("slope {slope}"))?;
    let growth = (counterexample_norm(2000, 1e-6) / 1e-6) / (counterexample_norm(2000, 1e-2) / 1e-2);
    ensure((80.0..=120.0).contains(&growth), format!("ratio growth {growth}"))?;
    // second route: propagate the datum and measure the orbit directly
    let g = SpectralGenerator::new(GeneratorKind::Schroedinger, 2000).unwrap();
    let f = counterexample_datum(&g);
    for &s in &[1e-6, 1e-4, 1e-2] {
        let d = linalg::dist(&g.propagate(&f, s).unwrap(), &f);
        ensure((d - counterexample_norm(2000, s)).abs() <= 1e-12, format!("orbit mismatch at t={s}"))?;
    }
    Ok(format!("slope={slope:.4} growth={growth:.2}"))
}

fn bound_trials(n: usize, trial: impl Fn(u64, usize) -> setflow::Result<setflow::geometry::BoundCheck>) -> Outcome {
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let c = trial(SEED, i).map_err(|e| format!("trial {i}: {e}"))?;
        ensure(c.lhs <= c.rhs + 1e-8, format!("trial {i}: {} > {}", c.lhs, c.rhs))?;
        worst = worst.min(c.rhs - c.lhs);
    }
    Ok(format!("trials={n} worst_margin={worst:.3e}"))
}

fn projection_difference() -> Outcome {
    bound_trials(1000, projection_difference_trial)
}

fn slater_bound() -> Outcome {
    bound_trials(500, slater_trial)
}

fn intersection_continuity() -> Outcome {
    let values = continuity_families(16, 2048).map_err(|e| e.to_string())?;
    ensure(values.len() == 10, "expected ten families")?;
    let worst = values.iter().cloned().fold(0.0, f64::max);
    ensure(worst < 1e-2, format!("distances {values:?}"))?;
    Ok(format!("families=10 max_distance={worst:.3e}"))
}

fn selection_transfer() -> Outcome {
    let mut used = 0;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        if let Some((d, bound, res)) = selection_transfer_trial(SEED, i).map_err(|e| e.to_string())? {
            used += 1;
            ensure(d <= bound + 1e-6, format!("instance {i}: {d} > {bound}"))?;
            ensure(res <= 1e-8, format!("instance {i}: residual {res}"))?;
            worst = worst.min(bound + 1e-6 - d);
        }
    }
    ensure(used > 0, "no instance had a nonempty intersection")?;
    Ok(format!("instances={used}/100 worst_margin={worst:.3e}"))
}

const KINDS: [(GeneratorKind, &str); 3] = [
    (GeneratorKind::Heat, "heat"),
    (GeneratorKind::Schroedinger, "schroedinger"),
    (GeneratorKind::Wave1D, "wave1d"),
];

fn semigroup_algebra() -> Outcome {
    for i in 0..300 {
        let mut rng = trial_rng(SEED, i);
        let (kind, _) = KINDS[i as usize % 3];
        let g = SpectralGenerator::new(kind, rng.gen_range(1..64)).unwrap();
        let x = point_in_ball(&mut rng, &vec![0.0; g.dim()], 3.0);
        let (t, s) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let a = g.propagate(&x, t + s).unwrap();
        let b = g.propagate(&g.propagate(&x, t).unwrap(), s).unwrap();
        ensure(linalg::dist(&a, &b) <= 1e-12 * (1.0 + linalg::norm(&x)), format!("law fails on trial {i}"))?;
        let (n, n0) = (linalg::norm(&g.propagate(&x, t).unwrap()), linalg::norm(&x));
        let ok = match kind {
            GeneratorKind::Heat => n <= n0 * (1.0 + 1e-15),
            _ => (n - n0).abs() <= 1e-12 * n0.max(1.0),
        };
        ensure(ok, format!("norm fails on trial {i}"))?;
    }
    let mut worst_gap: f64 = 0.0;
    for (kind, name) in KINDS {
        let g = SpectralGenerator::new(kind, 12).unwrap();
        let mut rng = trial_rng(SEED, 1000);
        let (a, b) = (point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0), point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0));
        let f = TimePath::from_fn(0.0, 1.0, 1025, |t| linalg::axpy(&a, (5.0 * t).cos(), &b)).unwrap();
        let u0 = point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0);
        let u = duhamel_solve(&g, &u0, &f).unwrap();
        let oracle = common::rk4_duhamel(name, 12, &u0, f.values(), f.step(), 16);
        let gap = common::l2_gap(u.values(), &oracle, f.step());
        ensure(gap <= 1e-6, format!("{name}: Duhamel gap {gap}"))?;
        worst_gap = worst_gap.max(gap);
        for seed in 0..5 {
            let mut rng = trial_rng(SEED, 2000 + seed);
            let (a, b) = (point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0), point_in_ball(&mut rng, &vec![0.0; g.dim()], 1.0));
            let f = TimePath::from_fn(0.0, 1.5, 129, |t| linalg::axpy(&a, (3.0 * t).sin(), &b)).unwrap();
            let pts = yosida_stability_check(&g, &f, &[0.1, 1.0, 10.0, 100.0, 1e4], &vec![0.0; g.dim()])
                .map_err(|e| e.to_string())?;
            ensure(pts.iter().all(|p| p.pass), format!("{name}: Yosida ladder {pts:?}"))?;
        }
    }
    Ok(format!("law/norm trials=300 duhamel_gap={worst_gap:.3e} ladders=15"))
}

fn random_potential(rng: &mut impl Rng, j: usize) -> VariableExponentPotential {
    let exponent = match rng.gen_range(0..3) {
        0 => ExponentProfile::Constant { value: rng.gen_range(2.2..4.0) },
        1 => ExponentProfile::LinearRamp { from: rng.gen_range(2.2..4.0), to: rng.gen_range(2.2..4.0) },
        _ => ExponentProfile::Bump { base: rng.gen_range(2.2..3.0), height: rng.gen_range(0.0..1.0) },
    };
    let coefficient = match rng.gen_range(0..3) {
        0 => CoefficientProfile::Constant { value: rng.gen_range(0.5..2.0) },
        1 => CoefficientProfile::TwoMinusT,
        _ => CoefficientProfile::Separable { decay: rng.gen_range(0.0..1.0), base: 1.0, amplitude: rng.gen_range(0.0..0.5) },
    };
    VariableExponentPotential::new(j, exponent, coefficient, 1.0, false).unwrap()
}

fn random_grid(rng: &mut impl Rng, j: usize, amp: f64) -> GridFunction {
    let (a, b, w) = (rng.gen_range(-amp..amp), rng.gen_range(-amp..amp), rng.gen_range(1.0..9.0));
    GridFunction::from_fn(j, |x| a * (w * x).sin() + b * x * (1.0 - x)).unwrap()
}

fn monotone_flow() -> Outcome {
    for i in 0..100 {
        let mut rng = trial_rng(SEED, 3000 + i);
        let j = [7, 15, 31][i as usize % 3];
        let p = random_potential(&mut rng, j);
        let t = rng.gen_range(0.0..1.0);
        let v = random_grid(&mut rng, j, 2.0);
        let s = p.subgradient(t, &v).unwrap();
        let h = p.mesh();
        let (mut err, mut scale): (f64, f64) = (0.0, 0.0);
        for k in 0..j {
            let d = 1e-6 * (1.0 + v.values()[k].abs());
            let (mut up, mut dn) = (v.values().to_vec(), v.values().to_vec());
            up[k] += d;
            dn[k] -= d;
            let fd = (p.energy(t, &GridFunction::new(up).unwrap()).unwrap()
                - p.energy(t, &GridFunction::new(dn).unwrap()).unwrap())
                / (2.0 * d);
            err = err.max((fd - h * s.values()[k]).abs());
            scale = scale.max((h * s.values()[k]).abs());
        }
        ensure(err <= 1e-5 * scale + 1e-9, format!("gradient trial {i}: {err} vs {scale}"))?;
    }

    let (j, k) = (63, 1 << 12);
    let lin = VariableExponentPotential::new(
        j,
        ExponentProfile::Constant { value: 2.0 },
        CoefficientProfile::Constant { value: 0.7 },
        1.0,
        true,
    )
    .unwrap();
    let v0 = GridFunction::from_fn(j, |x| (std::f64::consts::PI * x).sin() + 0.3 * (5.0 * std::f64::consts::PI * x).sin())
        .unwrap();
    let g = TimePath::from_fn(0.0, 1.0, k + 1, |t| (1..=j).map(|i| (3.0 * t).cos() * (i as f64 / 64.0)).collect()).unwrap();
    let sol = solve_monotone_ivp(&lin, &v0, &g).unwrap();
    let oracle = common::sine_basis_flow(j, 0.7, v0.values(), g.values(), g.step());
    let gap = common::l2_gap(sol.path.values(), &oracle, g.step()) * lin.mesh().sqrt();
    ensure(gap <= 1e-6, format!("linear oracle gap {gap}"))?;

    for i in 0..20 {
        let mut rng = trial_rng(SEED, 4000 + i);
        let j = [7, 15, 31][i as usize % 3];
        let p = random_potential(&mut rng, j);
        let v0 = random_grid(&mut rng, j, 2.0);
        let steps = 64;
        let zero = TimePath::constant(0.0, 1.0, steps + 1, &vec![0.0; j]).unwrap();
        let free = solve_monotone_ivp(&p, &v0, &zero).unwrap().path;
        for s in 0..steps {
            let e0 = p.energy(free.time(s), &GridFunction::new(free.value(s).to_vec()).unwrap()).unwrap();
            let e1 = p.energy(free.time(s + 1), &GridFunction::new(free.value(s + 1).to_vec()).unwrap()).unwrap();
            ensure(e1 <= e0 + 1e-12 * (1.0 + e0.abs()), format!("run {i} step {s}: energy rises"))?;
        }
        let amp = rng.gen_range(0.1..4.0);
        let g = TimePath::from_fn(0.0, 1.0, steps + 1, |t| (0..j).map(|m| amp * (5.0 * t + m as f64).sin()).collect()).unwrap();
        let forced = solve_monotone_ivp(&p, &v0, &g).unwrap().path;
        let mut budget = v0.norm();
        for s in 0..steps {
            budget += g.step() * GridFunction::new(linalg::lerp(g.value(s), g.value(s + 1), 0.5)).unwrap().norm();
            let vs = GridFunction::new(forced.value(s + 1).to_vec()).unwrap();
            ensure(vs.norm() <= budget + 1e-9, format!("run {i} step {s}: discrete bound"))?;
        }
    }

    let mut worst = f64::INFINITY;
    for i in 0..1000 {
        let mut rng = trial_rng(SEED, 5000 + i);
        let j = [7, 15, 31][i as usize % 3];
        let p = random_potential(&mut rng, j);
        let (x, y) = (random_grid(&mut rng, j, 3.0), random_grid(&mut rng, j, 3.0));
        let m = monotonicity_probe(&p, rng.gen_range(0.0..1.0), &x, &y).unwrap();
        ensure(m >= -1e-12, format!("pair {i}: {m}"))?;
        worst = worst.min(m);
    }
    Ok(format!("oracle_gap={gap:.3e} pairs=1000 min_probe={worst:.3e}"))
}

fn horizon(steps: usize) -> GlobalSettings {
    GlobalSettings { horizon: 1.0, steps, max_window: 1.0, solver: SolverSettings::default() }
}

fn coupled_solver() -> Outcome {
    // singleton maps
    for (kind, name) in KINDS {
        let gen = SpectralGenerator::new(kind, 3).unwrap();
        let pot = VariableExponentPotential::new(
            9,
            ExponentProfile::LinearRamp { from: 2.5, to: 3.0 },
            CoefficientProfile::TwoMinusT,
            1.0,
            false,
        )
        .unwrap();
        let yf = vec![0.1; gen.dim()];
        let sys = CoupledSystem::new(
            gen,
            pot,
            BasisFamilyMap::singleton(&yf).unwrap(),
            BasisFamilyMap::singleton(&[0.05; 9]).unwrap(),
        )
        .unwrap();
        let u0 = vec![0.3; gen.dim()];
        let v0 = GridFunction::from_fn(9, |x| x * (1.0 - x)).unwrap();
        let sol = solve_global(&sys, &u0, &v0, &horizon(64)).map_err(|e| e.to_string())?;
        ensure(sol.converged && sol.windows.iter().all(|w| w.iterations == 1), format!("{name}: singleton iterations"))?;
    }

    // linear block against the monolithic oracle
    let (modes, j, c_f, c_g) = (4, 15, 0.8, 0.6);
    let mut w = vec![0.0; j];
    w[2] = 0.6;
    w[9] = 0.8;
    let f_map = BasisFamilyMap::growth(modes, vec![c_f], vec![Expr::constant(0.0)]).unwrap();
    let g_map = BasisFamilyMap::new(
        vec![w.clone()],
        vec![Coefficient::Growth { c: c_g, readout: Some(linalg::unit(modes, 0)), nu: Expr::constant(0.0) }],
        false,
    )
    .unwrap();
    let lin = VariableExponentPotential::new(
        j,
        ExponentProfile::Constant { value: 2.0 },
        CoefficientProfile::Constant { value: 1.0 },
        1.0,
        true,
    )
    .unwrap();
    let sys = CoupledSystem::new(SpectralGenerator::new(GeneratorKind::Heat, modes).unwrap(), lin, f_map, g_map).unwrap();
    let u0 = vec![1.0, -0.5, 0.25, 0.1];
    let v0 = GridFunction::from_fn(j, |x| (std::f64::consts::PI * x).sin()).unwrap();
    let sol = solve_global(&sys, &u0, &v0, &horizon(200)).map_err(|e| e.to_string())?;
    ensure(sol.converged, "linear block did not converge")?;
    let (us, vs) = common::linear_block(modes, j, c_f, c_g, &w, &u0, v0.values(), 1.0, 200);
    let du = sol.u.values().iter().zip(&us).map(|(a, b)| linalg::dist(a, b)).fold(0.0, f64::max);
    let dv = sol.v.values().iter().zip(&vs).map(|(a, b)| linalg::dist(a, b)).fold(0.0, f64::max) * v0.mesh().sqrt();
    ensure(du <= 1e-5 && dv <= 1e-5, format!("linear block gap {du} {dv}"))?;

    // presets
    for (name, text) in [("heat", HEAT_PRESET), ("schrodinger", SCHRODINGER_PRESET)] {
        let exp = ExperimentConfig::from_json(text).and_then(|c| c.resolve()).map_err(|e| e.to_string())?;
        let sol = solve_global(&exp.system, &exp.u0, &exp.v0, &exp.settings).map_err(|e| e.to_string())?;
        ensure(sol.converged, format!("{name} preset did not converge"))?;
        for win in &sol.windows {
            ensure(win.residual_f <= 1e-8 && win.residual_g <= 1e-8, format!("{name}: residual"))?;
            ensure(win.apriori.pass && win.apriori.in_selection_ball, format!("{name}: a-priori bound or membership"))?;
        }
        ensure(run_margin(&sol, 1e-8) >= 0.0, format!("{name}: run margin"))?;
        ensure(sol.f.is_valid(1e-8) && sol.g.is_valid(1e-8), format!("{name}: selections leave the sets"))?;
        let (fe, ge) = exp.system.envelopes().unwrap();
        let (k, rho) = gronwall_constants(
            fe,
            ge,
            exp.system.generator.bound(),
            linalg::norm(&exp.u0),
            exp.v0.norm(),
            exp.settings.horizon,
        );
        let sums = trajectory_sums(&exp.system, &sol);
        ensure(gronwall_check(&sol.u.times(), &sums, k, rho).pass, format!("{name}: Gronwall envelope"))?;
    }

    // negative control: u' + Eu = 3⟨u, e₁⟩e₁ grows like e^{2t}, so a zero rate must be violated
    let pot = VariableExponentPotential::new(
        7,
        ExponentProfile::Constant { value: 3.0 },
        CoefficientProfile::Constant { value: 1.0 },
        1.0,
        false,
    )
    .unwrap();
    let sys = CoupledSystem::new(
        SpectralGenerator::new(GeneratorKind::Heat, 2).unwrap(),
        pot,
        BasisFamilyMap::growth(2, vec![3.0], vec![Expr::constant(0.0)]).unwrap(),
        BasisFamilyMap::singleton(&[0.0; 7]).unwrap(),
    )
    .unwrap();
    let u0 = linalg::unit(2, 0);
    let sol = solve_global(&sys, &u0, &GridFunction::zeros(7).unwrap(), &horizon(64)).map_err(|e| e.to_string())?;
    ensure(sol.converged, "negative control did not converge")?;
    let sums = trajectory_sums(&sys, &sol);
    ensure(!gronwall_check(&sol.u.times(), &sums, 1.0, 0.0).pass, "zero-rate envelope was not violated")?;
    let (fe, ge) = sys.envelopes().unwrap();
    let (k, rho) = gronwall_constants(fe, ge, 1.0, 1.0, 0.0, 1.0);
    ensure(gronwall_check(&sol.u.times(), &sums, k, rho).pass, "derived envelope fails on the control")?;
    Ok(format!("linear_block_gap={:.3e} presets=2 negative_control=rejected", du.max(dv)))
}

fn elementary_bound() -> Outcome {
    let closed = elementary_bound_probe(0.5, &[1.0, 3.0, 0.5], 1.5, 64, 0, 0).map_err(|e| e.to_string())?;
    ensure(closed.closed_form_gap <= 1e-8, format!("closed form gap {}", closed.closed_form_gap))?;
    let mut worst_gap: f64 = closed.closed_form_gap;
    for seed in 0..100u64 {
        let mut rng = trial_rng(SEED, 6000 + seed);
        let pieces = rng.gen_range(1..8);
        let h: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..3.0)).collect();
        let c = rng.gen_range(0.0..2.0);
        let r = elementary_bound_probe(c, &h, rng.gen_range(0.5..2.0), 32, 4, seed).map_err(|e| e.to_string())?;
        ensure(r.pass && r.closed_form_gap <= 1e-8, format!("h seed {seed}: {r:?}"))?;
        worst_gap = worst_gap.max(r.closed_form_gap);
    }
    Ok(format!("profiles=100 worst_closed_form_gap={worst_gap:.3e}"))
}

const BIN: &str = env!("CARGO_BIN_EXE_setflow");

fn run_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(BIN).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("`setflow {}` exited with {:?}", args.join(" "), out.status.code()))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let a = run_bin(&["verify", "all"])?;
    let b = run_bin(&["verify", "all"])?;
    ensure(a == b, "verify all output differs between runs")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in ["heat_debye.json", "schrodinger_debye.json"] {
        let cfg = format!("{}/presets/{name}", env!("CARGO_MANIFEST_DIR"));
        let outs: Vec<_> = (0..2).map(|r| dir.path().join(format!("{name}.{r}"))).collect();
        for o in &outs {
            run_bin(&["solve", &cfg, "--out", o.to_str().unwrap()])?;
        }
        for file in ["config.resolved.json", "trajectory.csv", "report.json"] {
            let x = std::fs::read(outs[0].join(file)).map_err(|e| e.to_string())?;
            let y = std::fs::read(outs[1].join(file)).map_err(|e| e.to_string())?;
            ensure(x == y, format!("{name}/{file} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("verify_bytes={} solve_files={files}", a.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("counterexample_order", 5, counterexample_order),
        ("projection_difference", 30, projection_difference),
        ("slater_bound", 60, slater_bound),
        ("intersection_continuity", 60, intersection_continuity),
        ("selection_transfer", 60, selection_transfer),
        ("semigroup_algebra", 60, semigroup_algebra),
        ("monotone_flow", 120, monotone_flow),
        ("coupled_solver", 300, coupled_solver),
        ("elementary_bound", 10, elementary_bound),
        ("determinism", 300, determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > Duration::from_secs(*limit) => Err(format!("{d}; exceeded {limit} s")),
            o => o,
        };
        let (verdict, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(e) => ("FAIL", e.as_str()),
        };
        println!("criterion {:>2} {name:<24} {verdict} {:>7.2}s/{limit}s  {detail}", i + 1, elapsed.as_secs_f64());
        failed += outcome.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria FAILED");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
