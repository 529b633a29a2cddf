//! Solves one of the bundled coupled presets and checks the run against its
//! Grönwall envelope.
//!
//! Run with `cargo run --release --example coupled_solver [heat|schrodinger]`.

use setflow::cli::suites::{trajectory_sums, HEAT_PRESET, SCHRODINGER_PRESET};
use setflow::cli::ExperimentConfig;
use setflow::linalg;
use setflow::solver::{gronwall_check, gronwall_constants, solve_global};

fn main() -> setflow::Result<()> {
    let text = match std::env::args().nth(1).as_deref() {
        Some("schrodinger") => SCHRODINGER_PRESET,
        _ => HEAT_PRESET,
    };
    let exp = ExperimentConfig::from_json(text)?.resolve()?;
    let sol = solve_global(&exp.system, &exp.u0, &exp.v0, &exp.settings)?;
    println!("converged: {}", sol.converged);
    for (w, (a, b)) in sol.windows.iter().zip(&sol.spans) {
        println!(
            "window [{a:.4}, {b:.4}]: {} iterations, residuals {:.1e} / {:.1e}, T0 = {:.4}",
            w.iterations, w.residual_f, w.residual_g, w.window.t0
        );
    }
    let (fe, ge) = exp.system.envelopes()?;
    let (k, rho) = gronwall_constants(
        fe,
        ge,
        exp.system.generator.bound(),
        linalg::norm(&exp.u0),
        exp.v0.norm(),
        exp.settings.horizon,
    );
    let g = gronwall_check(&sol.u.times(), &trajectory_sums(&exp.system, &sol), k, rho);
    println!("envelope {k:.3} e^({rho:.3} t): pass = {}, worst margin {:.3e}", g.pass, g.worst_margin);
    println!("|u(T)| = {:.6}, |v(T)| = {:.6}", linalg::norm(sol.u.last()), linalg::norm(sol.v.last()));
    Ok(())
}
