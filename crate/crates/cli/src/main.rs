//! `ssahm` experiment runner.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for numerical
//! failures. `SSAHM_THREADS` caps the worker pool.

mod config;
mod output;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use config::{load_config, overlay, Cli, Command, ConfigFile};
use output::{unix_time, Manifest, Sink};

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
            AppError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) | AppError::Io(_) => 3,
        }
    }
}

fn configure_threads() -> Result<(), AppError> {
    let Ok(v) = std::env::var("SSAHM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| AppError::Config(format!("SSAHM_THREADS = '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| AppError::Config(format!("SSAHM_THREADS: {e}")))
}

fn execute<C: Serialize>(
    name: &str,
    args: &mut C,
    solver: &config::SolverArgs,
    dir: PathBuf,
    f: impl FnOnce(&mut C, ssahm::scattering::ScatteringOptions, &mut Sink) -> Result<(), AppError>,
) -> Result<(), AppError> {
    let mut solver = solver.clone();
    let opts = run::solver_options(&mut solver)?;
    let mut sink = Sink::new(dir)?;
    f(args, opts, &mut sink)?;
    let manifest = Manifest {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        generated_at: unix_time(),
        config: &*args,
        solver: &opts,
        files: &sink.files,
    };
    output::write_json(&manifest, &sink.dir.join("manifest.json"))
}

fn real_main() -> Result<(), AppError> {
    configure_threads()?;
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let solver = overlay(file.solver, cli.solver, "solver")?;
    let output = overlay(file.output, cli.output, "output")?;
    let dir = output.dir.unwrap_or_else(|| PathBuf::from("out"));
    let name = cli.command.name();
    match cli.command {
        Command::Forward(a) => execute(name, &mut overlay(file.forward, a, name)?, &solver, dir, run::forward),
        Command::Cam(a) => execute(name, &mut overlay(file.cam, a, name)?, &solver, dir, run::cam),
        Command::Zeros(a) => execute(name, &mut overlay(file.zeros, a, name)?, &solver, dir, run::zeros),
        Command::Asym(a) => execute(name, &mut overlay(file.asym, a, name)?, &solver, dir, run::asym),
        Command::Uniq(a) => execute(name, &mut overlay(file.uniq, a, name)?, &solver, dir, run::uniq),
        Command::Transmission(a) => {
            execute(name, &mut overlay(file.transmission, a, name)?, &solver, dir, run::transmission)
        }
        Command::Bh(a) => execute(name, &mut overlay(file.bh, a, name)?, &solver, dir, run::bh),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssahm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
