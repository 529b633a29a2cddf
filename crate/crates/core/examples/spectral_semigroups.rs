//! Spectral propagators, exponential-Euler Duhamel solves, Yosida smoothing
//! and the square-root modulus of a rough Schrödinger orbit.
//!
//! Run with `cargo run --example spectral_semigroups`.

use setflow::selection::TimePath;
use setflow::semigroup::{
    counterexample_norm, counterexample_profile, counterexample_tail_bound, duhamel_solve, log_spaced, GeneratorKind,
    SpectralGenerator,
};
use setflow::solver::yosida_stability_check;

fn main() -> setflow::Result<()> {
    let heat = SpectralGenerator::new(GeneratorKind::Heat, 4)?;
    let u0 = [1.0, 0.5, 0.25, 0.125];
    println!("T(0.1) u0 = {:.6?}", heat.propagate(&u0, 0.1)?);

    let f = TimePath::from_fn(0.0, 1.0, 257, |t| vec![t.cos(), 0.0, 1.0, 0.0])?;
    let u = duhamel_solve(&heat, &u0, &f)?;
    println!("mild solution at t = 1: {:.6?}", u.last());

    for p in yosida_stability_check(&heat, &f, &[1.0, 10.0, 100.0], &u0)? {
        println!("lambda = {:>5}: |u_l - u|^2 = {:.3e} <= {:.3e}", p.lambda, p.lhs, p.rhs);
    }

    let t = log_spaced(1e-4, 1e-2, 25);
    let r = counterexample_profile(2000, &t)?;
    println!(
        "rough orbit: fitted order {:.3}, truncation tail <= {:.1e}",
        r.slope.unwrap_or(f64::NAN),
        counterexample_tail_bound(2000)
    );
    for s in [1e-2, 1e-4, 1e-6] {
        println!("  t = {s:.0e}: |u(t) - f| / t = {:.2}", counterexample_norm(2000, s) / s);
    }
    Ok(())
}
