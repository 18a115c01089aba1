//! Radial transfer-matrix evaluation of the sliced path integral.
//!
//! After the angular integrals, each `λ` leaves a chain of `N` radial
//! kernels. In half-density form (`ψ = √r φ`, measure `dr`) one slice is
//!
//! `k_λ(r, s) = (2πε)^{-1/2} e^{-(r-s)²/2ε} c_λ(r, s)`,
//!
//! with `c_λ = exp(-λ²ε/2r̄² - εV(r̄))`, `r̄ = √(rs)` and `V = -1/(8r²)`. This
//! is the large-`z` form of the exact slice `√(2πz) e^{-z} I_λ(z)`,
//! `z = rs/ε`. For `λ < 1/2` the sliced factor grows without bound as
//! `r̄ → 0`, so inside the fixed core `r̄ <` [`LatticeConfig::core_radius`]
//! the exact slice is used instead. Outside the core `z ≥ r_c²/ε` grows with
//! `N`, and the remaining slicing error is first order in `ε`.
//! The sector propagator is then
//!
//! `K_n = (r'r'')^{-1/2} (1/π) ∫_0^Λ cos(λ δθ_n) R_λ(r'', r') dλ`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{effective_potential, midpoint_radius};
use crate::error::{Error, Result};
use crate::propagators::default_lambda_max;
use crate::quadrature::{GaussLegendre, QuadratureSpec};
use crate::special::{bessel_i_scaled, BesselOrder};
use crate::types::{PolarPoint, PropagatorValue, SectorLabel};

/// Kernel used for one time slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SliceKernel {
    /// Gaussian step times `exp(-(λ² - 1/4)ε/2r̄²)`, i.e. with the effective
    /// potential.
    Sliced,
    /// As [`SliceKernel::Sliced`] but without the effective potential.
    WithoutEffectivePotential,
    /// The exact Bessel slice everywhere; free of slicing error.
    ExactBessel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    /// Number of time slices `N`, `ε = T/N`.
    pub slices: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Points of the log-spaced radial grid.
    pub grid_points: usize,
    pub kernel: SliceKernel,
    /// Slices with `√(rs)` below this radius use the exact Bessel kernel.
    pub core_radius: f64,
    /// Relative amplitude at either grid edge treated as escape.
    pub escape_tol: f64,
}

impl LatticeConfig {
    /// Defaults for the given endpoints: 400 points between
    /// `1e-5·min(r', r'', √T)` and `5·max(r', r'', √T)`, exact core `0.9·min(r', r'', √T)`.
    pub fn for_endpoints(src: &PolarPoint, dst: &PolarPoint, time: f64, slices: usize) -> Self {
        let st = time.sqrt();
        LatticeConfig {
            slices,
            r_min: 1e-5 * src.r().min(dst.r()).min(st),
            r_max: 5.0 * src.r().max(dst.r()).max(st),
            grid_points: 400,
            kernel: SliceKernel::Sliced,
            core_radius: 0.9 * src.r().min(dst.r()).min(st),
            escape_tol: 1e-7,
        }
    }

    pub fn validate(&self, src: &PolarPoint, dst: &PolarPoint, time: f64) -> Result<()> {
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::Domain {
                what: "time",
                value: time,
            });
        }
        if self.slices < 2 {
            return Err(Error::InvalidConfig("the lattice needs at least two slices"));
        }
        if self.grid_points < 8 {
            return Err(Error::InvalidConfig("the radial grid needs at least eight points"));
        }
        if !(self.r_min > 0.0 && self.r_min < src.r().min(dst.r())) {
            return Err(Error::InvalidConfig(
                "r_min must be positive and below both endpoint radii",
            ));
        }
        let reach = 4.0 * src.r().max(dst.r()).max(time.sqrt());
        if !(self.r_max > reach && self.r_max.is_finite()) {
            return Err(Error::InvalidConfig("r_max must exceed 4·max(r', r'', √T)"));
        }
        if !(self.core_radius >= 0.0 && self.escape_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "core_radius must be non-negative and escape_tol positive",
            ));
        }
        Ok(())
    }

    pub fn epsilon(&self, time: f64) -> f64 {
        time / self.slices as f64
    }
}

/// Log-spaced radii with trapezoidal weights for `∫ f(r) dr = ∫ f r du`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl RadialGrid {
    pub fn log_spaced(r_min: f64, r_max: f64, points: usize) -> Self {
        let h = (r_max / r_min).ln() / (points - 1) as f64;
        let r: Vec<f64> = (0..points).map(|j| r_min * (h * j as f64).exp()).collect();
        let mut w: Vec<f64> = r.iter().map(|x| x * h).collect();
        w[0] *= 0.5;
        w[points - 1] *= 0.5;
        RadialGrid { r, w }
    }
}

/// Gaussian cutoff of the banded kernel, in units of `√ε`.
const BAND_SIGMAS: f64 = 9.0;

/// λ-independent part of the slice kernel on the grid.
struct Slice {
    eps: f64,
    kernel: SliceKernel,
    core_radius: f64,
    /// `[start, end)` of the band in each row.
    rows: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    /// `(2πε)^{-1/2} e^{-(r-s)²/2ε} w_s` for each band entry.
    base: Vec<f64>,
    /// `z = rs/ε` for each band entry.
    z: Vec<f64>,
}

impl Slice {
    fn new(grid: &RadialGrid, eps: f64, kernel: SliceKernel, core_radius: f64) -> Self {
        let n = grid.r.len();
        let reach = BAND_SIGMAS * eps.sqrt();
        let norm = 1.0 / (2.0 * PI * eps).sqrt();
        let mut rows = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut base = Vec::new();
        let mut z = Vec::new();
        let mut start = 0;
        for i in 0..n {
            let ri = grid.r[i];
            while grid.r[start] < ri - reach {
                start += 1;
            }
            let mut end = i + 1;
            while end < n && grid.r[end] <= ri + reach {
                end += 1;
            }
            offsets.push(base.len());
            rows.push((start, end));
            for j in start..end {
                let d = ri - grid.r[j];
                base.push(norm * (-d * d / (2.0 * eps)).exp() * grid.w[j]);
                z.push(ri * grid.r[j] / eps);
            }
        }
        offsets.push(base.len());
        Slice {
            eps,
            kernel,
            core_radius,
            rows,
            offsets,
            base,
            z,
        }
    }

    /// Angular factor `c_λ` of one slice between radii `r` and `s`.
    fn factor(&self, lambda: f64, r: f64, s: f64) -> Result<f64> {
        let z = r * s / self.eps;
        if self.kernel == SliceKernel::ExactBessel || r * s < self.core_radius * self.core_radius {
            return Ok((2.0 * PI * z).sqrt() * bessel_i_scaled(BesselOrder::new(lambda)?, z)?.value);
        }
        let rbar = midpoint_radius(r, s)?;
        let centrifugal = lambda * lambda * self.eps / (2.0 * rbar * rbar);
        let potential = match self.kernel {
            SliceKernel::Sliced => self.eps * effective_potential(rbar)?,
            _ => 0.0,
        };
        Ok((-centrifugal - potential).exp())
    }

    /// Full kernel between two arbitrary radii, without quadrature weight.
    fn kernel_at(&self, lambda: f64, r: f64, s: f64) -> Result<f64> {
        let d = r - s;
        let g = (-d * d / (2.0 * self.eps)).exp() / (2.0 * PI * self.eps).sqrt();
        if g == 0.0 {
            return Ok(0.0);
        }
        Ok(g * self.factor(lambda, r, s)?)
    }

    fn band_values(&self, lambda: f64, grid: &RadialGrid) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.base.len());
        for (i, &(start, end)) in self.rows.iter().enumerate() {
            let off = self.offsets[i];
            for j in start..end {
                let k = off + j - start;
                let z = self.z[k];
                let c = if self.kernel == SliceKernel::ExactBessel || z * self.eps < self.core_radius * self.core_radius
                {
                    (2.0 * PI * z).sqrt() * bessel_i_scaled(BesselOrder::new(lambda)?, z)?.value
                } else {
                    self.factor(lambda, grid.r[i], grid.r[j])?
                };
                out.push(self.base[k] * c);
            }
        }
        Ok(out)
    }
}

/// Largest edge amplitudes and interior mass seen during radial propagation.
/// Edges are compared with the largest mass over all `λ`, since high orders
/// carry negligible, outward-pushed amplitude.
#[derive(Debug, Clone, Copy, Default)]
struct EdgeLeak {
    inner: f64,
    outer: f64,
    mass: f64,
}

impl EdgeLeak {
    fn max(self, other: EdgeLeak) -> EdgeLeak {
        EdgeLeak {
            inner: self.inner.max(other.inner),
            outer: self.outer.max(other.outer),
            mass: self.mass.max(other.mass),
        }
    }
}

/// `R_λ(r'', r')` after `N` slices, and the edge leakage along the way.
fn radial_amplitude(
    lambda: f64,
    slice: &Slice,
    grid: &RadialGrid,
    r_src: f64,
    r_dst: f64,
    steps: usize,
) -> Result<(f64, EdgeLeak)> {
    let n = grid.r.len();
    let values = slice.band_values(lambda, grid)?;
    let mut psi = Vec::with_capacity(n);
    for &r in &grid.r {
        psi.push(slice.kernel_at(lambda, r, r_src)?);
    }
    let mut next = alloc::vec![0.0; n];
    let mut leak = EdgeLeak::default();
    for _ in 0..steps.saturating_sub(2) {
        for (i, slot) in next.iter_mut().enumerate() {
            let (start, end) = slice.rows[i];
            let row = &values[slice.offsets[i]..slice.offsets[i + 1]];
            *slot = row.iter().zip(&psi[start..end]).map(|(k, p)| k * p).sum();
        }
        core::mem::swap(&mut psi, &mut next);
        leak = leak.max(edge_leak(&psi, grid));
    }
    leak = leak.max(edge_leak(&psi, grid));
    let mut total = 0.0;
    for ((&p, &r), &w) in psi.iter().zip(&grid.r).zip(&grid.w) {
        if p != 0.0 {
            total += slice.kernel_at(lambda, r_dst, r)? * w * p;
        }
    }
    Ok((total, leak))
}

fn edge_leak(psi: &[f64], grid: &RadialGrid) -> EdgeLeak {
    let mass: f64 = psi.iter().zip(&grid.w).map(|(p, w)| (p * w).abs()).sum();
    let last = psi.len() - 1;
    // ψ ~ r^{λ+1/2} below r_min: the missing mass is under ψ(r_0)·r_0
    EdgeLeak {
        inner: (psi[0] * grid.r[0]).abs(),
        outer: psi[last].abs() * grid.r[last],
        mass,
    }
}

/// Number of λ panels computed per batch before testing for decay.
const PANEL_BATCH: usize = 8;
const LOW_ORDER: usize = 12;

/// Transfer-matrix sector propagators for several sectors sharing one set of
/// radial amplitudes. Euclidean only.
pub fn transfer_matrix_sectors(
    sectors: &[SectorLabel],
    src: PolarPoint,
    dst: PolarPoint,
    time: f64,
    lattice: &LatticeConfig,
    quad: &QuadratureSpec,
) -> Result<Vec<PropagatorValue>> {
    lattice.validate(&src, &dst, time)?;
    quad.validate()?;
    let grid = RadialGrid::log_spaced(lattice.r_min, lattice.r_max, lattice.grid_points);
    let eps = lattice.epsilon(time);
    let slice = Slice::new(&grid, eps, lattice.kernel, lattice.core_radius);
    let deltas: Vec<f64> = sectors
        .iter()
        .map(|s| s.delta_theta(src.theta(), dst.theta()))
        .collect();
    let max_delta = deltas.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let x = src.r() * dst.r() / time;
    let lambda_max = quad.upper_limit.unwrap_or_else(|| default_lambda_max(x));
    let width = quad.panel_width.min(4.0 / max_delta.max(1e-300)).min(0.5);
    let panels = (lambda_max / width).ceil() as usize;

    let high = GaussLegendre::new(quad.order);
    let low = GaussLegendre::new(LOW_ORDER);
    let mut nodes: Vec<(usize, f64, f64, bool)> = Vec::new();

    let mut high_sum = alloc::vec![Complex64::new(0.0, 0.0); sectors.len()];
    let mut low_sum = alloc::vec![Complex64::new(0.0, 0.0); sectors.len()];
    let mut leak = EdgeLeak::default();
    let mut peak = 0.0f64;
    let mut last_panel_peak = f64::INFINITY;
    let mut evaluations = 0usize;
    let mut used_panels = 0;
    while used_panels < panels && !(last_panel_peak <= 1e-15 * peak) {
        let batch_end = (used_panels + PANEL_BATCH).min(panels);
        nodes.clear();
        for p in used_panels..batch_end {
            let a = p as f64 * width;
            let b = ((p + 1) as f64 * width).min(lambda_max);
            let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
            for (t, w) in high.nodes().iter().zip(high.weights()) {
                nodes.push((p, mid + half * t, w * half, true));
            }
            for (t, w) in low.nodes().iter().zip(low.weights()) {
                nodes.push((p, mid + half * t, w * half, false));
            }
        }
        let eval = |&(_, lambda, _, _): &(usize, f64, f64, bool)| {
            radial_amplitude(lambda, &slice, &grid, src.r(), dst.r(), lattice.slices)
        };
        #[cfg(feature = "parallel")]
        let results: Vec<Result<(f64, EdgeLeak)>> = nodes.par_iter().map(eval).collect();
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<(f64, EdgeLeak)>> = nodes.iter().map(eval).collect();

        let mut panel_peak = alloc::vec![0.0f64; batch_end - used_panels];
        for (node, res) in nodes.iter().zip(results) {
            let (amp, l) = res?;
            let (p, lambda, w, is_high) = *node;
            leak = leak.max(l);
            peak = peak.max(amp.abs());
            panel_peak[p - used_panels] = panel_peak[p - used_panels].max(amp.abs());
            let acc = if is_high { &mut high_sum } else { &mut low_sum };
            for (s, d) in acc.iter_mut().zip(&deltas) {
                *s += Complex64::new((lambda * d).cos() * amp * w, 0.0);
            }
        }
        evaluations += nodes.len();
        last_panel_peak = *panel_peak.last().unwrap_or(&0.0);
        used_panels = batch_end;
    }

    let mass = leak.mass.max(f64::MIN_POSITIVE);
    if leak.outer > lattice.escape_tol * mass {
        return Err(Error::GridEscape {
            bound: "r_max",
            relative_amplitude: leak.outer / mass,
        });
    }
    if leak.inner > lattice.escape_tol * mass {
        return Err(Error::GridEscape {
            bound: "r_min",
            relative_amplitude: leak.inner / mass,
        });
    }
    let scale = 1.0 / (PI * (src.r() * dst.r()).sqrt());
    let tail = if used_panels >= panels { last_panel_peak } else { 0.0 };
    Ok(high_sum
        .iter()
        .zip(&low_sum)
        .map(|(h, l)| PropagatorValue {
            amplitude: h * scale,
            error_estimate: ((h - l).norm() + tail * width) * scale,
            terms_used: evaluations,
        })
        .collect())
}

/// Sector propagator `K_n` from the sliced path integral (Euclidean).
pub fn transfer_matrix_kn(
    sector: SectorLabel,
    src: PolarPoint,
    dst: PolarPoint,
    time: f64,
    lattice: &LatticeConfig,
    quad: &QuadratureSpec,
) -> Result<PropagatorValue> {
    Ok(transfer_matrix_sectors(&[sector], src, dst, time, lattice, quad)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Period;

    fn p(r: f64, t: f64) -> PolarPoint {
        PolarPoint::new(r, t).unwrap()
    }

    #[test]
    fn grid_is_log_spaced_with_trapezoid_weights() {
        let g = RadialGrid::log_spaced(1e-3, 10.0, 401);
        assert!((g.r[0] - 1e-3).abs() < 1e-18);
        assert!((g.r[400] - 10.0).abs() < 1e-12);
        let ratio = g.r[1] / g.r[0];
        assert!((g.r[51] / g.r[50] - ratio).abs() < 1e-12);
        // ∫ r dr over the grid
        let integral: f64 = g.r.iter().zip(&g.w).map(|(r, w)| r * w).sum();
        assert!((integral - 0.5 * (100.0 - 1e-6)).abs() / 50.0 < 1e-3);
    }

    #[test]
    fn config_rejects_grid_not_covering_endpoints() {
        let (a, b) = (p(1.0, 0.0), p(1.2, 0.8));
        let mut c = LatticeConfig::for_endpoints(&a, &b, 0.5, 8);
        assert!(c.validate(&a, &b, 0.5).is_ok());
        c.r_max = 4.0;
        assert!(c.validate(&a, &b, 0.5).is_err());
        let mut c = LatticeConfig::for_endpoints(&a, &b, 0.5, 8);
        c.r_min = 1.1;
        assert!(c.validate(&a, &b, 0.5).is_err());
        c.r_min = 1e-3;
        c.slices = 1;
        assert!(c.validate(&a, &b, 0.5).is_err());
    }

    #[test]
    fn narrow_grid_reports_escape() {
        let (a, b) = (p(1.0, 0.0), p(1.2, 0.8));
        let mut c = LatticeConfig::for_endpoints(&a, &b, 0.5, 8);
        c.r_min = 0.5;
        let r = transfer_matrix_kn(
            SectorLabel::new(0, Period::TwoPi),
            a,
            b,
            0.5,
            &c,
            &QuadratureSpec::default(),
        );
        assert!(matches!(r, Err(Error::GridEscape { bound: "r_min", .. })), "{r:?}");
    }

    #[test]
    fn assembled_sector_value_is_real() {
        let (a, b) = (p(1.0, 0.0), p(1.2, 0.8));
        let c = LatticeConfig::for_endpoints(&a, &b, 0.5, 8);
        let v = transfer_matrix_kn(
            SectorLabel::new(1, Period::TwoPi),
            a,
            b,
            0.5,
            &c,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(v.amplitude.im, 0.0);
        assert!(v.amplitude.re > 0.0);
    }
}
