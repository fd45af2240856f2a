//! `mfl`: run laboratory experiments from line-oriented config files.
//!
//! Exit codes: 0 success, 2 configuration or guard violation, 3 numerical
//! abort, 1 anything else (I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfl_core::runner::{parse_config_with_overrides, run};
use mfl_core::Error;

#[derive(Parser)]
#[command(name = "mfl", version, about = "Mean-field laboratory for interacting bosons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`section.key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set solver.dt=5e-4`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Scaled Hartree evolution.
    Hartree(Common),
    /// Contact (cubic) NLS evolution.
    Nls(Common),
    /// Coupled condensate and pair-excitation evolution.
    Pair(Common),
    /// Exact N-body dynamics against the Hartree orbital, swept over N.
    Manybody(Common),
    /// Truncated Fock-space dynamics against the second-order ansatz.
    Fock(Common),
    /// Sweep `sweep.target` over the configured N list.
    Sweep(Common),
    /// Log-log fit of a two-column CSV (`fit.input`).
    Fit(Common),
    /// Many-body convergence rate over an N list.
    Rate {
        /// Particle numbers, e.g. `2,3,4,5`.
        #[arg(long = "N", value_name = "LIST")]
        n: String,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Grid points.
        #[arg(long)]
        points: Option<usize>,
        /// Box length.
        #[arg(long)]
        length: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_guard() {
        2
    } else if e.is_numerical() {
        3
    } else {
        1
    }
}

fn execute(kind: &str, common: Common, extra: Vec<String>) -> Result<(), Error> {
    let text = match &common.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut overrides = vec![format!("experiment.kind = {kind}")];
    overrides.extend(extra);
    overrides.extend(common.overrides);
    let cfg = parse_config_with_overrides(&text, &overrides)?;
    let artifacts = run(&cfg)?;
    println!("{}", artifacts.digest());
    for f in &artifacts.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Hartree(c) => execute("hartree", c, Vec::new()),
        Command::Nls(c) => execute("nls", c, Vec::new()),
        Command::Pair(c) => execute("pair", c, Vec::new()),
        Command::Manybody(c) => execute("manybody", c, Vec::new()),
        Command::Fock(c) => execute("fock", c, Vec::new()),
        Command::Sweep(c) => execute("sweep", c, Vec::new()),
        Command::Fit(c) => execute("fit", c, Vec::new()),
        Command::Rate { n, beta, t_end, dt, points, length, common } => {
            let mut extra = vec![format!("scaling.N = {n}")];
            extra.extend(beta.map(|b| format!("scaling.beta = {b}")));
            extra.extend(t_end.map(|t| format!("solver.t_end = {t}")));
            extra.extend(dt.map(|d| format!("solver.dt = {d}")));
            extra.extend(points.map(|m| format!("grid.points = {m}")));
            extra.extend(length.map(|l| format!("grid.length = {l}")));
            execute("manybody", common, extra)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
