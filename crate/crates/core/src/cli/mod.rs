//! The `setflow` command line.
//!
//! ```text
//! setflow verify <convex|selection|semigroup|monotone|solver|all> [--trials N] [--seed S] [--out FILE]
//! setflow lemma <projection|slater|continuity> [--trials N] [--seed S] [--out FILE]
//! setflow counterexample [--modes N] [--t-min A] [--t-max B] [--points P] [--out DIR]
//! setflow solve <CONFIG> --out DIR
//! ```
//!
//! Exit codes: 0 success, 1 failed checks or solver non-convergence,
//! 2 usage or configuration errors.

pub mod config;
pub mod output;
pub mod suites;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use suites::{run_lemma, run_suite, CheckLine, LemmaProbe, Suite, SuiteOptions};

use crate::error::Error;

pub const FORMAT_VERSION: &str = "setflow-1";

#[derive(Debug, Parser)]
#[command(name = "setflow", version, about = "Checks and solvers for evolution inclusions with set-valued right-hand sides")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a property battery.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also write the check lines as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the convex-geometry inequality probes.
    Lemma {
        #[arg(value_enum)]
        probe: LemmaProbe,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate ‖T(t)f − f‖ for the non-Lipschitz orbit.
    Counterexample {
        #[arg(long, default_value_t = 2000)]
        modes: usize,
        #[arg(long, default_value_t = 1e-4)]
        t_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        t_max: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Directory for `counterexample.csv` and `counterexample.json`;
        /// without it both are printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the coupled system described by a JSON config.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Config { .. } | Error::InvalidInput(_) => 2,
                _ => 1,
            }
        }
    }
}

fn print_lines(lines: &[CheckLine], out: Option<PathBuf>, stdout: &mut dyn Write) -> crate::Result<i32> {
    for l in lines {
        writeln!(stdout, "{}", l.render())?;
    }
    let pass = lines.iter().all(|l| l.pass);
    writeln!(stdout, "{}", if pass { "all checks passed" } else { "some checks FAILED" })?;
    if let Some(path) = out {
        output::write_atomic(&path, &output::checks_json(lines))?;
    }
    Ok(if pass { 0 } else { 1 })
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> crate::Result<i32> {
    match cmd {
        Command::Verify { suite, trials, seed, out } => {
            let lines = run_suite(suite, &SuiteOptions { seed, trials })?;
            print_lines(&lines, out, stdout)
        }
        Command::Lemma { probe, trials, seed, out } => {
            let lines = run_lemma(probe, &SuiteOptions { seed, trials })?;
            print_lines(&lines, out, stdout)
        }
        Command::Counterexample { modes, t_min, t_max, points, out } => {
            output::counterexample(modes, t_min, t_max, points, out.as_deref(), stdout)
        }
        Command::Solve { config, out } => output::solve(&config, &out, stdout),
    }
}
