//! Independent re-derivations of the sector propagator.
//!
//! [`transfer`] evaluates the time-sliced path integral literally: angles are
//! integrated out against `e^{-iλ(θ_N - θ_0 - δθ_n)}`, leaving for each `λ`
//! a radial chain of Gaussian kernels with the centrifugal factor and the
//! `-1/(8r²)` effective potential, propagated on a log-spaced grid.
//! [`winding`] samples Brownian bridges and histograms their winding numbers.

pub mod transfer;
pub mod winding;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

pub use transfer::{transfer_matrix_kn, transfer_matrix_sectors, LatticeConfig, RadialGrid, SliceKernel};
pub use winding::{
    brownian_winding_distribution, brownian_winding_distribution_with, SectorCount, WindingConfig, WindingHistogram,
};

/// The ordering correction `-1/(8r²)` picked up by the polar-coordinate
/// discretization of the kinetic term.
pub fn effective_potential(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            what: "radius",
            value: r,
        });
    }
    Ok(-1.0 / (8.0 * r * r))
}

/// Geometric-mean radius `√(r_prev r_next)` at which a slice's centrifugal
/// and effective-potential terms are evaluated.
pub fn midpoint_radius(r_prev: f64, r_next: f64) -> Result<f64> {
    for r in [r_prev, r_next] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain {
                what: "radius",
                value: r,
            });
        }
    }
    Ok((r_prev * r_next).sqrt())
}
