mod common;

use proptest::prelude::*;
use setflow::flow::{
    monotonicity_probe, prox_step, prox_step_with, solve_monotone_ivp, CoefficientProfile, ExponentProfile, GridFunction,
    ProxSettings, VariableExponentPotential,
};
use setflow::linalg;
use setflow::selection::TimePath;

fn pot(j: usize, p: ExponentProfile, d: CoefficientProfile) -> VariableExponentPotential {
    VariableExponentPotential::new(j, p, d, 1.0, false).unwrap()
}

#[test]
fn energy_example() {
    let p = pot(1, ExponentProfile::Constant { value: 3.0 }, CoefficientProfile::Constant { value: 1.0 });
    let e = p.energy(0.0, &GridFunction::new(vec![1.0]).unwrap()).unwrap();
    assert!((e - 17.0 / 6.0).abs() < 1e-15);
}

#[test]
fn validation_rejects_inadmissible_profiles() {
    let two = ExponentProfile::Constant { value: 2.0 };
    let one = CoefficientProfile::Constant { value: 1.0 };
    assert!(VariableExponentPotential::new(7, two.clone(), one.clone(), 1.0, false).is_err());
    assert!(VariableExponentPotential::new(7, two, one.clone(), 1.0, true).is_ok());
    let ramp = ExponentProfile::LinearRamp { from: 1.9, to: 3.0 };
    assert!(VariableExponentPotential::new(7, ramp, one, 1.0, true).is_err());
    let cubic = ExponentProfile::Constant { value: 3.0 };
    // 2 − t reaches zero at t = 2
    assert!(VariableExponentPotential::new(7, cubic.clone(), CoefficientProfile::TwoMinusT, 2.0, false).is_err());
    let growing = CoefficientProfile::Separable { decay: -0.5, base: 1.0, amplitude: 0.0 };
    assert!(VariableExponentPotential::new(7, cubic, growing, 1.0, false).is_err());
}

#[test]
fn linear_flow_matches_sine_basis_oracle() {
    let j = 63;
    let k = 1 << 12;
    let p = VariableExponentPotential::new(
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
    let sol = solve_monotone_ivp(&p, &v0, &g).unwrap();
    let oracle = common::sine_basis_flow(j, 0.7, v0.values(), g.values(), g.step());
    // L²(0, 1; ℓ²_h) distance
    let gap = common::l2_gap(sol.path.values(), &oracle, g.step()) * p.mesh().sqrt();
    assert!(gap <= 1e-6, "{gap}");
    assert!(sol.max_residual <= 1e-10 * (1.0 + 10.0));
}

#[test]
fn dissipation_and_discrete_apriori_bound() {
    let p = pot(
        15,
        ExponentProfile::Bump { base: 2.4, height: 0.8 },
        CoefficientProfile::Separable { decay: 0.3, base: 1.0, amplitude: 0.4 },
    );
    let v0 = GridFunction::from_fn(15, |x| 2.0 * x * (1.0 - x) * (7.0 * x).sin()).unwrap();
    let zero = TimePath::constant(0.0, 1.0, 101, &vec![0.0; 15]).unwrap();
    let free = solve_monotone_ivp(&p, &v0, &zero).unwrap().path;
    for k in 0..100 {
        let e0 = p.energy(free.time(k), &GridFunction::new(free.value(k).to_vec()).unwrap()).unwrap();
        let e1 = p.energy(free.time(k + 1), &GridFunction::new(free.value(k + 1).to_vec()).unwrap()).unwrap();
        assert!(e1 <= e0 + 1e-14, "step {k}: {e1} > {e0}");
    }
    let g = TimePath::from_fn(0.0, 1.0, 101, |t| (0..15).map(|i| 4.0 * (t * 9.0 + i as f64).sin()).collect()).unwrap();
    let forced = solve_monotone_ivp(&p, &v0, &g).unwrap().path;
    let mut budget = v0.norm();
    for k in 0..100 {
        let gbar = GridFunction::new(linalg::lerp(g.value(k), g.value(k + 1), 0.5)).unwrap();
        budget += g.step() * gbar.norm();
        let vk = GridFunction::new(forced.value(k + 1).to_vec()).unwrap();
        assert!(vk.norm() <= budget + 1e-9);
    }
}

#[test]
fn prox_reports_certified_residual() {
    let p = pot(31, ExponentProfile::LinearRamp { from: 2.2, to: 5.0 }, CoefficientProfile::TwoMinusT);
    let v = GridFunction::from_fn(31, |x| 3.0 * (11.0 * x).sin()).unwrap();
    let g = GridFunction::from_fn(31, |x| x).unwrap();
    let out = prox_step_with(&p, 0.5, &v, &g, 0.05, ProxSettings::default()).unwrap();
    assert!(out.residual <= 1e-10 * (1.0 + v.norm()));
    // optimality: (w − v)/τ + A w = g
    let a = p.subgradient(0.5, &out.point).unwrap();
    let r: Vec<f64> = (0..31)
        .map(|i| (out.point.values()[i] - v.values()[i]) / 0.05 + a.values()[i] - g.values()[i])
        .collect();
    assert!(GridFunction::new(r).unwrap().norm() <= 1e-9);
}

fn profile(sel: u8, a: f64, b: f64) -> ExponentProfile {
    match sel % 3 {
        0 => ExponentProfile::Constant { value: 2.1 + a },
        1 => ExponentProfile::LinearRamp { from: 2.1 + a, to: 2.1 + b },
        _ => ExponentProfile::Bump { base: 2.1 + a, height: b },
    }
}

fn grid(j: usize, c: [f64; 3]) -> GridFunction {
    GridFunction::from_fn(j, |x| c[0] * (3.0 * x).sin() + c[1] * x * x + c[2] * (9.0 * x).cos()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subgradient_matches_finite_differences(sel in any::<u8>(), a in 0.0f64..2.0, b in 0.0f64..2.0,
                                              c in prop::array::uniform3(-2.0f64..2.0), t in 0.0f64..1.0) {
        let p = pot(9, profile(sel, a, b), CoefficientProfile::TwoMinusT);
        let v = grid(9, c);
        let h = p.mesh();
        let s = p.subgradient(t, &v).unwrap();
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..9 {
            let d = 1e-6 * (1.0 + v.values()[k].abs());
            let mut up = v.values().to_vec();
            let mut dn = v.values().to_vec();
            up[k] += d;
            dn[k] -= d;
            let fd = (p.energy(t, &GridFunction::new(up).unwrap()).unwrap()
                - p.energy(t, &GridFunction::new(dn).unwrap()).unwrap()) / (2.0 * d);
            err = err.max((fd - h * s.values()[k]).abs());
            scale = scale.max((h * s.values()[k]).abs());
        }
        prop_assert!(err <= 1e-5 * scale + 1e-9, "{} vs {}", err, scale);
    }

    #[test]
    fn prox_is_nonexpansive_and_operator_monotone(sel in any::<u8>(), a in 0.0f64..2.0, b in 0.0f64..2.0,
                                                  c1 in prop::array::uniform3(-2.0f64..2.0),
                                                  c2 in prop::array::uniform3(-2.0f64..2.0),
                                                  tau in 0.01f64..0.5) {
        let p = pot(11, profile(sel, a, b), CoefficientProfile::Constant { value: 1.3 });
        let (x, y) = (grid(11, c1), grid(11, c2));
        let zero = GridFunction::zeros(11).unwrap();
        let px = prox_step(&p, 0.2, &x, &zero, tau).unwrap();
        let py = prox_step(&p, 0.2, &y, &zero, tau).unwrap();
        let d_out = GridFunction::new(linalg::sub(px.values(), py.values())).unwrap().norm();
        let d_in = GridFunction::new(linalg::sub(x.values(), y.values())).unwrap().norm();
        prop_assert!(d_out <= d_in + 1e-9);
        prop_assert!(monotonicity_probe(&p, 0.2, &x, &y).unwrap() >= -1e-12);
    }
}
