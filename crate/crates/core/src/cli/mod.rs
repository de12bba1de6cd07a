//! Command-line surface and the property battery behind `verify`.
pub mod commands;
pub mod config;
pub mod output;
pub mod study;
pub mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{Flags, RunConfig};
pub use study::{Sample, Study, StudyConfig};
pub use verify::{property, Measured, PropertyResult, VerifyReport};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "weakkam", version, about = "Weak KAM solutions and Aubry-Mather data of twist maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in maps and their invariant checks.
    Catalog(Flags),
    /// Solve `u = T^c u + α(c)` at one class `--c`.
    Solve(Flags),
    /// Sample `α` and `ρ` over `--range` with `--steps` classes.
    Alpha(Flags),
    /// Minimal average actions of periodic orbits with `q <= --qmax`.
    Beta(Flags),
    /// Full pseudographs over `--range`, as CSV and optionally `--svg`.
    Foliation(Flags),
    /// Calibrated backward orbit from `--theta` at `--c`.
    Orbit(Flags),
    /// Minimizing candidates on the image of the vertical at `--theta`.
    Vertical(Flags),
    /// Run the property battery and print a JSON report.
    Verify(Flags),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

/// Sizes the global thread pool from `WEAKKAM_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("WEAKKAM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::InvalidParameter {
        key: "WEAKKAM_THREADS".into(),
        reason: format!("expected a positive integer, got `{v}`"),
    })?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            key: "WEAKKAM_THREADS".into(),
            reason: "must be at least 1".into(),
        });
    }
    // a pool already built by an earlier call keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn dispatch(command: &Command) -> Result<commands::Outcome> {
    let (flags, run): (&Flags, fn(&RunConfig) -> Result<commands::Outcome>) = match command {
        Command::Catalog(f) => (f, commands::catalog),
        Command::Solve(f) => (f, commands::solve),
        Command::Alpha(f) => (f, commands::alpha),
        Command::Beta(f) => (f, commands::beta),
        Command::Foliation(f) => (f, commands::foliation),
        Command::Orbit(f) => (f, commands::orbit),
        Command::Vertical(f) => (f, commands::vertical),
        Command::Verify(f) => (f, commands::verify),
    };
    let cfg = RunConfig::from_flags(flags)?;
    run(&cfg)
}

fn write_outcome(out: &commands::Outcome) -> Result<()> {
    use std::io::Write;
    for (path, text) in &out.files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, text)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(out.stdout.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match dispatch(&cli.command).and_then(|out| write_outcome(&out).map(|_| out)) {
        Ok(out) if out.clean => ExitCode::from(EXIT_OK),
        Ok(_) => {
            eprintln!("error: non-convergence or failed properties (see output)");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if commands::is_config_error(&e) { EXIT_CONFIG } else { EXIT_FAILURE })
        }
    }
}
