//! Domain types shared by the propagators and the lattice oracle.
//!
//! Units: mass = 1, ħ = 1. Angles are radians and are never wrapped; on the
//! covering space of the punctured plane every real angle is a distinct point.

use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// A point `(r, θ)` of the punctured plane (or of its covering space).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    r: f64,
    theta: f64,
}

impl PolarPoint {
    /// Fails unless `r > 0` and both coordinates are finite: the origin is excised.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain {
                what: "radius",
                value: r,
            });
        }
        if !theta.is_finite() {
            return Err(Error::Domain {
                what: "angle",
                value: theta,
            });
        }
        Ok(PolarPoint { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Representative of `θ` in `(-π, π]`.
    pub fn principal_theta(&self) -> f64 {
        principal_angle(self.theta)
    }

    pub fn to_cartesian(&self) -> (f64, f64) {
        (self.r * self.theta.cos(), self.r * self.theta.sin())
    }

    /// The same point rotated by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        PolarPoint {
            r: self.r,
            theta: self.theta + angle,
        }
    }
}

/// Maps an angle into `(-π, π]`.
pub fn principal_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta - two_pi * (theta / two_pi).round();
    if t <= -PI {
        t += two_pi;
    } else if t > PI {
        t -= two_pi;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Imaginary time: every sum and integral converges absolutely.
    Euclidean,
    /// Real time, reached through `I_ν(-ix) = e^{-iπν/2} J_ν(x)`.
    RealTime,
}

/// Evaluation regime together with the elapsed time `T > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMode {
    regime: Regime,
    time: f64,
}

impl TimeMode {
    pub fn new(regime: Regime, time: f64) -> Result<Self> {
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Domain {
                what: "time",
                value: time,
            });
        }
        Ok(TimeMode { regime, time })
    }

    pub fn euclidean(time: f64) -> Result<Self> {
        Self::new(Regime::Euclidean, time)
    }

    pub fn real_time(time: f64) -> Result<Self> {
        Self::new(Regime::RealTime, time)
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Time step `ε = T/N`.
    pub fn slice(&self, slices: usize) -> f64 {
        self.time / slices as f64
    }
}

/// Angular period separating neighbouring homotopy sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Period {
    /// One particle winding around a flux tube.
    TwoPi,
    /// Relative coordinate of two identical particles.
    Pi,
}

impl Period {
    pub fn radians(self) -> f64 {
        match self {
            Period::TwoPi => 2.0 * PI,
            Period::Pi => PI,
        }
    }
}

/// Homotopy class `n` of paths between two fixed endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SectorLabel {
    pub n: i64,
    pub period: Period,
}

impl SectorLabel {
    pub fn new(n: i64, period: Period) -> Self {
        SectorLabel { n, period }
    }

    /// Total angular change `δθ_n = θ'' + n·period − θ'` of the sector.
    pub fn delta_theta(&self, theta_src: f64, theta_dst: f64) -> f64 {
        theta_dst + self.n as f64 * self.period.radians() - theta_src
    }
}

/// Statistics angle `α`; sector `n` is weighted by `e^{-inα}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticsAngle(f64);

impl StatisticsAngle {
    pub const BOSONS: StatisticsAngle = StatisticsAngle(0.0);
    pub const FERMIONS: StatisticsAngle = StatisticsAngle(PI);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() {
            Ok(StatisticsAngle(alpha))
        } else {
            Err(Error::Domain {
                what: "statistics angle",
                value: alpha,
            })
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `e^{-inα}`.
    pub fn sector_weight(self, n: i64) -> Complex64 {
        Complex64::cis(-(n as f64) * self.0)
    }
}

/// Stopping rule for the angular-momentum series.
///
/// The sum stops only after `consecutive_small` successive terms each fell
/// below `rel_tol · |partial sum|`, and never before `min_terms` terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub min_terms: usize,
    pub max_terms: usize,
    pub consecutive_small: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_tol: 1e-12,
            min_terms: 3,
            max_terms: 100_000,
            consecutive_small: 3,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig("rel_tol must lie in (0, 1)"));
        }
        if self.min_terms < 1 {
            return Err(Error::InvalidConfig("min_terms must be at least 1"));
        }
        if self.consecutive_small < 2 {
            return Err(Error::InvalidConfig("consecutive_small must be at least 2"));
        }
        if self.max_terms < self.min_terms.max(self.consecutive_small) {
            return Err(Error::InvalidConfig("max_terms is below min_terms"));
        }
        Ok(())
    }
}

/// A propagator amplitude with the truncation or quadrature error that was
/// actually estimated while computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorValue {
    pub amplitude: Complex64,
    pub error_estimate: f64,
    pub terms_used: usize,
}

impl PropagatorValue {
    pub fn exact(amplitude: Complex64) -> Self {
        PropagatorValue {
            amplitude,
            error_estimate: 0.0,
            terms_used: 1,
        }
    }

    pub fn abs(&self) -> f64 {
        self.amplitude.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_excised() {
        assert!(PolarPoint::new(0.0, 1.0).is_err());
        assert!(PolarPoint::new(-1.0, 1.0).is_err());
        assert!(PolarPoint::new(1.0, f64::NAN).is_err());
        assert!(PolarPoint::new(1e-300, 123.0).is_ok());
    }

    #[test]
    fn delta_theta_per_period() {
        let s = SectorLabel::new(2, Period::TwoPi);
        assert_eq!(s.delta_theta(0.25, 1.0), 1.0 + 4.0 * PI - 0.25);
        let s = SectorLabel::new(-3, Period::Pi);
        assert_eq!(s.delta_theta(0.0, 0.5), 0.5 - 3.0 * PI);
    }

    #[test]
    fn principal_angle_range() {
        for t in [-10.0, -PI, 0.0, PI, 3.5, 100.0] {
            let p = principal_angle(t);
            assert!(p > -PI && p <= PI, "{t} -> {p}");
            assert!(((t - p) / (2.0 * PI) - ((t - p) / (2.0 * PI)).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn time_must_be_positive() {
        assert!(TimeMode::euclidean(0.0).is_err());
        assert!(TimeMode::real_time(-1.0).is_err());
        assert!(TimeMode::euclidean(f64::INFINITY).is_err());
    }

    #[test]
    fn truncation_policy_validation() {
        assert!(TruncationPolicy::default().validate().is_ok());
        let bad = TruncationPolicy {
            consecutive_small: 1,
            ..TruncationPolicy::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fermion_weights_alternate() {
        let w0 = StatisticsAngle::FERMIONS.sector_weight(0);
        let w1 = StatisticsAngle::FERMIONS.sector_weight(1);
        assert!((w0 + w1).norm() < 1e-15);
    }
}
