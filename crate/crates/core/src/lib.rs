//! Propagators on multiply connected configuration spaces.
//!
//! The path integral on the punctured plane is split into homotopy sectors
//! labelled by a winding number `n`; each sector is an ordinary path integral
//! on the simply connected covering space, and sectors may be recombined with
//! any phases `e^{-inα}` forming a one-dimensional representation of the
//! fundamental group. This crate evaluates:
//!
//! * the sector propagator `K_n` as a λ-integral over `I_{|λ|}`,
//! * the Aharonov–Bohm flux-tube propagator (period `2π`),
//! * the relative propagator of two anyons (period `π`) and its boson and
//!   fermion limits,
//! * the free particle on a circle threaded by a flux, in winding and
//!   momentum form,
//!
//! together with two independent oracles, a radial transfer-matrix
//! evaluation of the time-sliced path integral and a Brownian-bridge
//! winding-number Monte Carlo.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature. The `parallel` feature spreads λ-nodes and Monte Carlo
//! blocks over a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::excessive_precision)]
// `!(x > 0.0)` is the NaN-rejecting form used throughout for argument checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod oracle;
pub mod propagators;
pub mod quadrature;
pub mod special;
pub mod types;

pub use error::{Error, Result};
pub use propagators::{
    boson_fermion_k, circle_flux, circle_flux_momentum, flux_tube_k, flux_tube_k_route, free_2d, gauge_phase, sector_k,
    sector_sum, two_anyon_k, two_anyon_k_route, CircleCutoff, EuclideanRoute, ExchangeSign,
};
pub use quadrature::QuadratureSpec;
pub use special::{bessel_i_generating_sum, bessel_i_scaled, bessel_j, log_gamma, BesselOrder, ScaledBesselValue};
pub use types::{
    Period, PolarPoint, PropagatorValue, Regime, SectorLabel, StatisticsAngle, TimeMode, TruncationPolicy,
};

/// Crate version, echoed into output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
