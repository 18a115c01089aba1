use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// One row per propagator at a single point.
    Eval,
    /// Sector propagators K_n and their phase-weighted partial sums.
    Sectors,
    /// One parameter swept over a uniform grid, long format.
    Sweep,
    /// Transfer-matrix lattice against the closed-form K_n over N = 8, 16, ...
    Oracle,
    /// Brownian winding histogram against sector ratios.
    Winding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Euclidean,
    Realtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PeriodArg {
    #[value(name = "2pi")]
    TwoPi,
    #[value(name = "pi")]
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Alpha,
    Time,
    #[value(name = "r-dst")]
    RDst,
    #[value(name = "theta-dst")]
    ThetaDst,
}

/// A real number that may be written with `pi`, e.g. `pi`, `-pi/3`, `3pi/2`,
/// `0.5pi`. The text is kept for the metadata header.
#[derive(Debug, Clone, PartialEq)]
pub struct Real {
    pub text: String,
    pub value: f64,
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn parse_real(s: &str) -> Result<Real, String> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || format!("cannot read {s:?} as a number (multiples of pi such as 3pi/2 are accepted)");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (t.as_str(), None),
    };
    let num = num.trim();
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let value = match den {
        Some(d) => {
            let d = d.trim().parse::<f64>().map_err(|_| bad())?;
            value / d
        }
        None => value,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(Real {
        text: s.to_string(),
        value,
    })
}

/// Propagators on the punctured plane by homotopy-sector decomposition.
///
/// All output is CSV preceded by '#'-prefixed key=value metadata lines.
/// Angles are radians. Exit codes: 0 success, 2 usage or precondition,
/// 3 numerical evaluation failure. ANYONPROP_THREADS caps the worker pool.
#[derive(Debug, Clone, Parser)]
#[command(name = "anyonprop", version)]
pub struct Args {
    #[arg(long, value_enum, default_value = "eval")]
    pub command: Command,
    #[arg(long, default_value = "1", value_parser = parse_real, allow_hyphen_values = true)]
    pub r_src: Real,
    #[arg(long, default_value = "0", value_parser = parse_real, allow_hyphen_values = true)]
    pub theta_src: Real,
    #[arg(long, default_value = "1.2", value_parser = parse_real, allow_hyphen_values = true)]
    pub r_dst: Real,
    #[arg(long, default_value = "0.8", value_parser = parse_real, allow_hyphen_values = true)]
    pub theta_dst: Real,
    /// Elapsed time T (the Euclidean time in euclidean mode).
    #[arg(long, default_value = "0.5", value_parser = parse_real, allow_hyphen_values = true)]
    pub time: Real,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub regime: RegimeArg,
    /// Statistics angle α; sector n carries e^{-inα}.
    #[arg(long, default_value = "0", value_parser = parse_real, allow_hyphen_values = true)]
    pub alpha: Real,
    /// Angular period between neighbouring sectors: 2pi (flux tube) or pi (two anyons).
    #[arg(long, value_enum, default_value = "2pi")]
    pub period: PeriodArg,
    /// Largest |n| tabulated by the sectors and winding commands.
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// Relative stopping tolerance of the angular-momentum series.
    #[arg(long, default_value = "1e-12", value_parser = parse_real)]
    pub rel_tol: Real,
    /// Largest slice count of the oracle ladder 8, 16, 32, ...
    #[arg(long, default_value_t = 64)]
    pub lattice_n: usize,
    /// Radial grid points of the lattice oracle.
    #[arg(long, default_value_t = 400)]
    pub grid_points: usize,
    /// Brownian bridges drawn by the winding command.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Time steps per bridge before refinement near the origin.
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Parameter varied by the sweep command.
    #[arg(long, value_enum, default_value = "alpha")]
    pub sweep: SweepParam,
    #[arg(long, default_value = "0", value_parser = parse_real, allow_hyphen_values = true)]
    pub sweep_from: Real,
    #[arg(long, default_value = "2pi", value_parser = parse_real, allow_hyphen_values = true)]
    pub sweep_to: Real,
    /// Grid values of the sweep, endpoints included.
    #[arg(long, default_value_t = 17)]
    pub sweep_points: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
