use core::fmt;

use num_complex::Complex64;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the routine.
    Domain { what: &'static str, value: f64 },
    /// A special-function expansion failed to converge.
    NonConvergence {
        routine: &'static str,
        x: f64,
        order: f64,
        terms: usize,
    },
    /// A truncated series hit its term budget before the stopping rule fired.
    Truncation {
        partial: Complex64,
        tail_estimate: f64,
        terms: usize,
        suggested_terms: Option<usize>,
    },
    /// The requested sum is only conditionally (or not at all) convergent.
    Divergent { what: &'static str },
    /// Adaptive quadrature exhausted its refinement depth.
    Quadrature {
        estimate: Complex64,
        error_estimate: f64,
        tolerance: f64,
    },
    /// `sector_sum` was handed sectors with different angular periods.
    MixedPeriods,
    /// Significant lattice amplitude reached the edge of the radial grid.
    GridEscape {
        bound: &'static str,
        relative_amplitude: f64,
    },
    /// The Brownian bridge refinement could not resolve a near-origin step.
    Sampling { sample: u64, depth: u32 },
    /// A configuration value violates its documented invariant.
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::NonConvergence {
                routine,
                x,
                order,
                terms,
            } => write!(
                f,
                "{routine} did not converge (x = {x}, order = {order}, terms = {terms})"
            ),
            Error::Truncation {
                partial,
                tail_estimate,
                terms,
                suggested_terms,
            } => {
                write!(
                    f,
                    "series truncated after {terms} terms (partial sum {partial}, tail estimate {tail_estimate:e})"
                )?;
                if let Some(n) = suggested_terms {
                    write!(f, "; try at least {n}")?;
                }
                Ok(())
            }
            Error::Divergent { what } => write!(f, "{what} is not absolutely convergent"),
            Error::Quadrature {
                estimate,
                error_estimate,
                tolerance,
            } => write!(
                f,
                "quadrature did not reach tolerance {tolerance:e} (estimate {estimate}, error {error_estimate:e})"
            ),
            Error::MixedPeriods => f.write_str("sectors with different angular periods cannot be summed"),
            Error::GridEscape {
                bound,
                relative_amplitude,
            } => write!(
                f,
                "lattice amplitude {relative_amplitude:e} at the {bound} boundary; enlarge {bound}"
            ),
            Error::Sampling { sample, depth } => write!(
                f,
                "sample {sample}: bridge refinement exceeded depth {depth} near the origin"
            ),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
