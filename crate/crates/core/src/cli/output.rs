//! File emission. Floats in CSV use `{:.16e}` (17 significant digits);
//! JSON uses the shortest representation that round-trips.
//!
//! CSV layouts:
//! * `counterexample.csv`: `t,norm,ratio`
//! * `trajectory.csv`: `t,u_norm,v_norm,residual_f,residual_g`, with `v`
//!   measured in the discrete `L²` norm.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::json;

use super::config::ExperimentConfig;
use super::suites::{trajectory_sums, CheckLine};
use super::FORMAT_VERSION;
use crate::error::{Error, Result};
use crate::linalg;
use crate::semigroup::{counterexample_profile, log_spaced};
use crate::solver::{gronwall_check, gronwall_constants, solve_global};

/// Writes through a sibling temporary file so a failed run never leaves a
/// truncated output behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn checks_json(lines: &[CheckLine]) -> String {
    pretty(&json!({ "format_version": FORMAT_VERSION, "checks": lines }))
}

pub fn counterexample(
    modes: usize,
    t_min: f64,
    t_max: f64,
    points: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    if modes == 0 || points == 0 {
        return Err(Error::invalid("modes and points must be positive"));
    }
    if !(t_min > 0.0 && t_min <= t_max && t_max <= 1.0) {
        return Err(Error::invalid(format!("need 0 < t_min <= t_max <= 1, got [{t_min}, {t_max}]")));
    }
    let t = log_spaced(t_min, t_max, if t_min == t_max { 1 } else { points });
    let report = counterexample_profile(modes, &t)?;
    let mut csv = String::from("t,norm,ratio\n");
    for i in 0..report.t.len() {
        writeln!(csv, "{:.16e},{:.16e},{:.16e}", report.t[i], report.norm[i], report.ratio[i]).unwrap();
    }
    let summary = pretty(&json!({
        "format_version": FORMAT_VERSION,
        "modes": modes,
        "t_min": t_min,
        "t_max": t_max,
        "points": report.t.len(),
        "slope": report.slope,
        "tail_bound": report.tail_bound,
    }));
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_atomic(&dir.join("counterexample.csv"), &csv)?;
            write_atomic(&dir.join("counterexample.json"), &summary)?;
            match report.slope {
                Some(s) => writeln!(stdout, "slope {s:.6} over {} points, tail bound {:.3e}", report.t.len(), report.tail_bound)?,
                None => writeln!(stdout, "slope undefined for a single point, tail bound {:.3e}", report.tail_bound)?,
            }
        }
        None => {
            write!(stdout, "{csv}")?;
            write!(stdout, "{summary}")?;
        }
    }
    Ok(0)
}

pub fn solve(config_path: &Path, out: &Path, stdout: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(config_path)?;
    let config = ExperimentConfig::from_json(&text)?;
    let exp = config.resolve()?;
    let sol = solve_global(&exp.system, &exp.u0, &exp.v0, &exp.settings)?;

    let (f_env, g_env) = exp.system.envelopes()?;
    let (k, rho) = gronwall_constants(
        f_env,
        g_env,
        exp.system.generator.bound(),
        linalg::norm(&exp.u0),
        exp.v0.norm(),
        exp.settings.horizon,
    );
    let sums = trajectory_sums(&exp.system, &sol);
    let gronwall = gronwall_check(&sol.u.times(), &sums, k, rho);
    let iterations: usize = sol.windows.iter().map(|w| w.iterations).sum();
    let report = pretty(&json!({
        "format_version": FORMAT_VERSION,
        "converged": sol.converged,
        "failed_window": sol.failed_window,
        "blow_up": sol.blow_up,
        "horizon": exp.settings.horizon,
        "steps": exp.settings.steps,
        "completed_until": sol.u.t1(),
        "total_iterations": iterations,
        "max_residual_f": sol.f.max_residual(),
        "max_residual_g": sol.g.max_residual(),
        "envelopes": { "f": f_env, "g": g_env },
        "gronwall": gronwall,
        "spans": sol.spans,
        "windows": sol.windows,
    }));

    let s = exp.system.potential.mesh().sqrt();
    let mut csv = String::from("t,u_norm,v_norm,residual_f,residual_g\n");
    for i in 0..sol.u.len() {
        writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            sol.u.time(i),
            linalg::norm(sol.u.value(i)),
            s * linalg::norm(sol.v.value(i)),
            sol.f.residuals[i],
            sol.g.residuals[i]
        )
        .unwrap();
    }

    fs::create_dir_all(out)?;
    write_atomic(&out.join("config.resolved.json"), &(config.to_json() + "\n"))?;
    write_atomic(&out.join("trajectory.csv"), &csv)?;
    write_atomic(&out.join("report.json"), &report)?;
    if sol.converged {
        writeln!(stdout, "converged: {} windows, {iterations} iterations", sol.windows.len())?;
        Ok(0)
    } else {
        match sol.failed_window {
            Some(w) => writeln!(stdout, "not converged: window {w} failed, output covers t <= {}", sol.u.t1())?,
            None => writeln!(stdout, "not converged: blow-up before t = {}", sol.u.t1())?,
        }
        Ok(1)
    }
}
