//! Command-line front end for `anyonprop-core`: evaluations, sector tables,
//! parameter sweeps and oracle comparisons written as deterministic CSV.

pub mod args;
mod commands;
mod table;

use std::fmt;

pub use args::{Args, Command, PeriodArg, RegimeArg, SweepParam};

/// A failed run, carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or violated preconditions; exit code 2.
    Usage(String),
    /// The numerics reported an error; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Numerical(m) => write!(f, "evaluation failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Caps the global rayon pool from `ANYONPROP_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ANYONPROP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("ANYONPROP_THREADS must be a positive integer, got {raw:?}")))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command and returns the complete CSV document.
pub fn render(args: &Args) -> Result<String, CliError> {
    commands::run(args)
}

/// Runs one command and writes the document to `--out` or standard output.
pub fn run(args: &Args) -> Result<(), CliError> {
    configure_threads()?;
    let doc = render(args)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, doc).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(doc.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to standard output: {e}")))
        }
    }
}
