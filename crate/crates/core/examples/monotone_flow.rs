//! Implicit-Euler flow of a variable-exponent potential on a 1D grid.
//!
//! Run with `cargo run --example monotone_flow`.

use setflow::flow::{solve_monotone_ivp, CoefficientProfile, ExponentProfile, GridFunction, VariableExponentPotential};
use setflow::selection::TimePath;

fn main() -> setflow::Result<()> {
    let pot = VariableExponentPotential::new(
        31,
        ExponentProfile::LinearRamp { from: 2.5, to: 4.0 },
        CoefficientProfile::TwoMinusT,
        1.0,
        false,
    )?;
    let v0 = GridFunction::from_fn(31, |x| (std::f64::consts::PI * x).sin() + 0.5 * (6.0 * x).sin())?;
    let forcing = TimePath::from_fn(0.0, 1.0, 65, |t| vec![0.5 * (4.0 * t).cos(); 31])?;
    let sol = solve_monotone_ivp(&pot, &v0, &forcing)?;
    println!("largest prox residual: {:.1e}", sol.max_residual);
    for k in (0..sol.path.len()).step_by(16) {
        let t = sol.path.time(k);
        let v = GridFunction::new(sol.path.value(k).to_vec())?;
        println!("t = {t:.3}: |v| = {:.6}  energy = {:.6}", v.norm(), pot.energy(t, &v)?);
    }
    Ok(())
}
