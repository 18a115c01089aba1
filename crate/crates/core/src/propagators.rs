//! Propagators on the punctured plane and on the circle.
//!
//! Euclidean mode is the `T → -iT` continuation of the real-time formulas.
//! Every Bessel argument `x = r'r''/T` is then positive real and the Bessel
//! factors are carried as `e^{-x} I_ν(x)`; the stripped `e^{x}` is folded
//! into the Gaussian prefactor, which becomes `e^{-(r''-r')²/2T} ≤ 1`.
//! Real-time mode uses `I_ν(-ix) = e^{-iπν/2} J_ν(x)`.
//!
//! Phase convention: sector `n` carries `e^{-inα}`, and `δθ_n = θ'' + n·P - θ'`
//! for period `P`. With this convention the flux-tube sum carries
//! `e^{i(m+α/2π)(θ''-θ')}`, so advancing `θ''` by one period multiplies the
//! propagator by `e^{+iα}`.

use core::f64::consts::PI;
use core::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{bessel_i_scaled, bessel_j, quarter_turns, BesselOrder};
use crate::types::{
    Period, PolarPoint, PropagatorValue, Regime, SectorLabel, StatisticsAngle, TimeMode, TruncationPolicy,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Order at which the Bessel kernel failed inside a (possibly parallel)
/// integrand. Kept in 32-bit halves for targets without 64-bit atomics;
/// racing failures may interleave the halves, so the value is only used to
/// reproduce the error.
#[derive(Default)]
struct FailedOrder {
    set: AtomicBool,
    hi: AtomicU32,
    lo: AtomicU32,
}

impl FailedOrder {
    fn record(&self, nu: f64) {
        let bits = nu.to_bits();
        self.hi.store((bits >> 32) as u32, Ordering::Relaxed);
        self.lo.store(bits as u32, Ordering::Relaxed);
        self.set.store(true, Ordering::Release);
    }

    fn get(&self) -> Option<f64> {
        if !self.set.load(Ordering::Acquire) {
            return None;
        }
        let bits = (u64::from(self.hi.load(Ordering::Relaxed)) << 32) | u64::from(self.lo.load(Ordering::Relaxed));
        Some(f64::from_bits(bits))
    }
}

/// `(r'' - r')²`, `|r'' - r'|²` and `|r'' + r'|²` without cancellation in the
/// angular part.
struct Separation {
    radial: f64,
    direct: f64,
    exchanged: f64,
}

fn separation(src: &PolarPoint, dst: &PolarPoint) -> Separation {
    let dr = dst.r() - src.r();
    let radial = dr * dr;
    let half = 0.5 * (dst.theta() - src.theta());
    let rr = 4.0 * src.r() * dst.r();
    Separation {
        radial,
        direct: radial + rr * half.sin().powi(2),
        exchanged: radial + rr * half.cos().powi(2),
    }
}

/// Gaussian factor of a free propagator: `e^{-d²/2T}` or `e^{id²/2T}`.
fn gaussian(d2: f64, mode: &TimeMode) -> Complex64 {
    let a = d2 / (2.0 * mode.time());
    match mode.regime() {
        Regime::Euclidean => Complex64::new((-a).exp(), 0.0),
        Regime::RealTime => Complex64::cis(a),
    }
}

/// `1/(cT)` in Euclidean mode and `1/(icT)` in real time.
fn normalization(c: f64, mode: &TimeMode) -> Complex64 {
    let v = 1.0 / (c * mode.time());
    match mode.regime() {
        Regime::Euclidean => Complex64::new(v, 0.0),
        Regime::RealTime => Complex64::new(0.0, -v),
    }
}

/// Prefactor multiplying the scaled Bessel kernel, normalized by `1/(cT)`.
///
/// Euclidean: `e^{-(r''-r')²/2T}/(cT)`, which already contains the `e^{x}`
/// stripped from `I_ν`. Real time: `e^{i(r'²+r''²)/2T}/(icT)`.
fn bessel_prefactor(c: f64, src: &PolarPoint, dst: &PolarPoint, mode: &TimeMode) -> Complex64 {
    let d2 = match mode.regime() {
        Regime::Euclidean => separation(src, dst).radial,
        Regime::RealTime => src.r() * src.r() + dst.r() * dst.r(),
    };
    gaussian(d2, mode) * normalization(c, mode)
}

/// Free propagator in two dimensions.
pub fn free_2d(src: PolarPoint, dst: PolarPoint, mode: TimeMode) -> PropagatorValue {
    let d2 = separation(&src, &dst).direct;
    PropagatorValue::exact(gaussian(d2, &mode) * normalization(2.0 * PI, &mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExchangeSign {
    /// Bosons, `α = 0`.
    Symmetric,
    /// Fermions, `α = π`.
    Antisymmetric,
}

impl ExchangeSign {
    pub fn value(self) -> f64 {
        match self {
            ExchangeSign::Symmetric => 1.0,
            ExchangeSign::Antisymmetric => -1.0,
        }
    }
}

/// Free relative propagator plus or minus its exchanged image, where the image
/// point is the vector sum `r'' + r'`.
pub fn boson_fermion_k(sign: ExchangeSign, src: PolarPoint, dst: PolarPoint, mode: TimeMode) -> PropagatorValue {
    let s = separation(&src, &dst);
    let amp =
        (gaussian(s.direct, &mode) + gaussian(s.exchanged, &mode) * sign.value()) * normalization(2.0 * PI, &mode);
    PropagatorValue::exact(amp)
}

/// `exp(-iα(θ''-θ')/2π)`, converting the winding-phase convention into the
/// single-valued-wavefunction convention.
pub fn gauge_phase(alpha: StatisticsAngle, theta_src: f64, theta_dst: f64) -> Complex64 {
    Complex64::cis(-alpha.radians() * (theta_dst - theta_src) / (2.0 * PI))
}

/// Bessel kernel at order `ν ≥ 0`: `e^{-x} I_ν(x)` or `e^{-iπν/2} J_ν(x)`.
fn bessel_kernel(nu: f64, x: f64, regime: Regime) -> Result<Complex64> {
    let order = BesselOrder::new(nu)?;
    Ok(match regime {
        Regime::Euclidean => Complex64::new(bessel_i_scaled(order, x)?.value, 0.0),
        Regime::RealTime => quarter_turns(-nu) * bessel_j(order, x)?,
    })
}

/// `Σ_m e^{i(s m + c)Δ} B_{|s m + c|}(x)`, summed outward from the index that
/// minimizes the order, alternating above and below it.
fn angular_series(
    step: f64,
    shift: f64,
    delta: f64,
    x: f64,
    regime: Regime,
    trunc: &TruncationPolicy,
) -> Result<SeriesSum> {
    trunc.validate()?;
    let m0 = -(shift / step).round();
    let mut sum = ZERO;
    let mut abs_sum = 0.0;
    let mut recent = alloc::collections::VecDeque::with_capacity(trunc.consecutive_small);
    let mut small_run = 0usize;
    for k in 0..trunc.max_terms {
        let offset = if k == 0 {
            0.0
        } else if k % 2 == 1 {
            k.div_ceil(2) as f64
        } else {
            -((k / 2) as f64)
        };
        let signed = step * (m0 + offset) + shift;
        let nu = signed.abs();
        let term = Complex64::cis(signed * delta) * bessel_kernel(nu, x, regime)?;
        sum += term;
        let size = term.norm();
        abs_sum += size;
        if recent.len() == trunc.consecutive_small {
            recent.pop_front();
        }
        recent.push_back(size);
        // In real time J_ν(x) can be accidentally small near a zero while ν < x.
        let decaying = regime == Regime::Euclidean || nu > x;
        if decaying && size <= trunc.rel_tol * sum.norm() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        let used = k + 1;
        if used >= trunc.min_terms && small_run >= trunc.consecutive_small {
            return Ok(SeriesSum {
                sum,
                tail: recent.iter().sum(),
                abs_sum,
                used,
            });
        }
    }
    let tail: f64 = recent.iter().sum();
    // orders needed: past x plus the super-exponential decay length, on both sides
    let needed = 2.0 * ((x + 12.0 * x.sqrt() + 20.0) / step + shift.abs()) + 1.0;
    Err(Error::Truncation {
        partial: sum,
        tail_estimate: tail,
        terms: trunc.max_terms,
        suggested_terms: Some((needed.ceil() as usize).max(2 * trunc.max_terms)),
    })
}

struct SeriesSum {
    sum: Complex64,
    tail: f64,
    abs_sum: f64,
    used: usize,
}

/// How the Euclidean angular-momentum sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EuclideanRoute {
    /// The `m`-series, switching to [`EuclideanRoute::Integral`] when the
    /// series' own rounding floor exceeds the truncation tolerance.
    #[default]
    Auto,
    /// The `m`-series only, whatever its conditioning.
    Series,
    /// Schläfli's integral for every term, resummed over `m`: a classical
    /// term `e^{x cos Δ}` plus a diffraction integral that vanishes when
    /// `α/2π` is an integer. Free of the cancellation that costs the series
    /// about `e^{x(1 - cos Δ)}` in relative accuracy.
    Integral,
}

/// Rounding noise of a sum is about `ε·Σ|terms|`; beyond this multiple of
/// the tolerance the series is no longer trusted.
const ROUNDING_MARGIN: f64 = 16.0;

/// `e^{-x} Σ_m e^{i(m+a)Δ} I_{|m+a|}(x)` via the resummed Schläfli integral.
///
/// With `Δ = Δ' + 2πk`, `Δ' ∈ [-π, π]`, and `a₀ = a mod 1`:
///
/// `e^{iαk} [ e^{-2x sin²(Δ'/2)} − (sin πa₀/π) e^{ia₀Δ'} ∫_0^∞ e^{-x(1+cosh s)} N(s)/D(s) ds ]`
///
/// with `N = 2 sinh(s/2) sinh((1-2a₀)s/2) + 2 cos(Δ'/2) e^{-iΔ'/2} cosh(a₀s)` and
/// `D = 2(sinh²(s/2) + cos²(Δ'/2))`. Near the shadow boundary `Δ' → ±π` the
/// integrand is a Lorentzian of width `|cos(Δ'/2)|`, resolved with
/// geometrically growing panels.
fn flux_sum_integral(shift: f64, delta: f64, x: f64, quad: &QuadratureSpec) -> Result<(Complex64, f64, usize)> {
    let a0 = shift - shift.floor();
    let k = (delta / (2.0 * PI)).round();
    let dp = delta - 2.0 * PI * k;
    let half = 0.5 * dp;
    let sector_phase = Complex64::cis(2.0 * PI * a0 * k);
    let classical = Complex64::new((-2.0 * x * half.sin().powi(2)).exp(), 0.0);
    if a0 == 0.0 {
        return Ok((sector_phase * classical, 0.0, 1));
    }
    let c = half.cos();
    let c2 = c * c;
    let lead = Complex64::cis(-half) * (2.0 * c);
    let integrand = |s: f64| {
        let sh = (0.5 * s).sinh();
        let num = lead * (a0 * s).cosh() + 2.0 * sh * ((0.5 - a0) * s).sinh();
        num * ((-x * (1.0 + s.cosh())).exp() / (2.0 * (sh * sh + c2)))
    };
    // beyond s_max the integrand is below e^{-40} of its value at s = 0
    let s_max = (1.0 + 40.0 / x).acosh().clamp(4.0, 700.0);
    let mut edges = alloc::vec![0.0];
    let mut w = c.abs();
    if w > 0.0 && w < 0.5 {
        while w < 0.5 {
            edges.push(w);
            w *= 2.0;
        }
    }
    edges.push(0.5);
    edges.push(s_max);
    let mut value = ZERO;
    let mut error = 0.0;
    let mut evaluations = 0;
    for pair in edges.windows(2) {
        let q = integrate(&integrand, pair[0], pair[1], quad)?;
        value += q.value;
        error += q.error_estimate;
        evaluations += q.evaluations;
    }
    let weight = (PI * a0).sin() / PI;
    let diffraction = Complex64::cis(a0 * dp) * value * weight;
    Ok((sector_phase * (classical - diffraction), error * weight, evaluations))
}

#[allow(clippy::too_many_arguments)]
fn series_propagator(
    c: f64,
    step: f64,
    shift: f64,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    trunc: &TruncationPolicy,
    route: EuclideanRoute,
) -> Result<PropagatorValue> {
    let x = src.r() * dst.r() / mode.time();
    let delta = dst.theta() - src.theta();
    let pre = bessel_prefactor(c, &src, &dst, &mode);
    let euclidean = mode.regime() == Regime::Euclidean;
    if route == EuclideanRoute::Integral {
        if !euclidean {
            return Err(Error::InvalidConfig("the integral route exists only in Euclidean mode"));
        }
        return integral_propagator(step, shift, delta, x, pre, trunc);
    }
    let series = angular_series(step, shift, delta, x, mode.regime(), trunc).map_err(|e| match e {
        Error::Truncation {
            partial,
            tail_estimate,
            terms,
            suggested_terms,
        } => Error::Truncation {
            partial: partial * pre,
            tail_estimate: tail_estimate * pre.norm(),
            terms,
            suggested_terms,
        },
        other => other,
    })?;
    let rounding = f64::EPSILON * series.abs_sum;
    if euclidean && route == EuclideanRoute::Auto && ROUNDING_MARGIN * rounding > trunc.rel_tol * series.sum.norm() {
        return integral_propagator(step, shift, delta, x, pre, trunc);
    }
    Ok(PropagatorValue {
        amplitude: series.sum * pre,
        error_estimate: (series.tail + rounding) * pre.norm(),
        terms_used: series.used,
    })
}

fn integral_propagator(
    step: f64,
    shift: f64,
    delta: f64,
    x: f64,
    pre: Complex64,
    trunc: &TruncationPolicy,
) -> Result<PropagatorValue> {
    let quad = QuadratureSpec {
        rel_tol: (0.01 * trunc.rel_tol).max(1e-15),
        ..QuadratureSpec::default()
    };
    let (sum, err, evals) = if step == 1.0 {
        flux_sum_integral(shift, delta, x, &quad)?
    } else {
        // even m only: ½[S(Δ) + e^{-iπc}S(Δ+π)] with the same shift c
        let (s0, e0, n0) = flux_sum_integral(shift, delta, x, &quad)?;
        let (s1, e1, n1) = flux_sum_integral(shift, delta + PI, x, &quad)?;
        ((s0 + Complex64::cis(-PI * shift) * s1) * 0.5, 0.5 * (e0 + e1), n0 + n1)
    };
    Ok(PropagatorValue {
        amplitude: sum * pre,
        error_estimate: (err + 4.0 * f64::EPSILON * sum.norm()) * pre.norm(),
        terms_used: evals,
    })
}

/// Propagator of a unit-mass particle around a flux tube carrying statistics
/// angle `α`, as the angular-momentum series with orders `|m + α/2π|`.
pub fn flux_tube_k(
    alpha: StatisticsAngle,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    trunc: &TruncationPolicy,
) -> Result<PropagatorValue> {
    flux_tube_k_route(alpha, src, dst, mode, trunc, EuclideanRoute::Auto)
}

/// [`flux_tube_k`] with an explicit Euclidean evaluation route.
pub fn flux_tube_k_route(
    alpha: StatisticsAngle,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    trunc: &TruncationPolicy,
    route: EuclideanRoute,
) -> Result<PropagatorValue> {
    series_propagator(
        2.0 * PI,
        1.0,
        alpha.radians() / (2.0 * PI),
        src,
        dst,
        mode,
        trunc,
        route,
    )
}

/// Relative-coordinate propagator of two anyons, orders `|2m + α/π|`.
pub fn two_anyon_k(
    alpha: StatisticsAngle,
    rel_src: PolarPoint,
    rel_dst: PolarPoint,
    mode: TimeMode,
    trunc: &TruncationPolicy,
) -> Result<PropagatorValue> {
    two_anyon_k_route(alpha, rel_src, rel_dst, mode, trunc, EuclideanRoute::Auto)
}

/// [`two_anyon_k`] with an explicit Euclidean evaluation route.
pub fn two_anyon_k_route(
    alpha: StatisticsAngle,
    rel_src: PolarPoint,
    rel_dst: PolarPoint,
    mode: TimeMode,
    trunc: &TruncationPolicy,
    route: EuclideanRoute,
) -> Result<PropagatorValue> {
    series_propagator(PI, 2.0, alpha.radians() / PI, rel_src, rel_dst, mode, trunc, route)
}

/// Default upper limit of the λ integral, `x + 12√x + 20`.
pub fn default_lambda_max(x: f64) -> f64 {
    x + 12.0 * x.sqrt() + 20.0
}

/// Bound on `∫_Λ^∞ |B_λ(x)| dλ`.
///
/// Euclidean: `e^{-x}I_λ(x)` decreases in `λ` and `I_{ν+1}/I_ν < q(ν) =
/// x/(ν + √(ν²+x²))`, so the integral is at most `e^{-x}I_Λ(x)/(1 - q(Λ))`.
/// Real time: `|J_ν(x)| ≤ (x/2)^ν/Γ(ν+1)`, whose unit-step ratio past `Λ` is
/// below `x/2(Λ+1)`.
fn lambda_tail_bound(lambda_max: f64, x: f64, regime: Regime) -> Result<f64> {
    match regime {
        Regime::Euclidean => {
            let s = bessel_i_scaled(BesselOrder::new(lambda_max)?, x)?.value;
            let q = x / (lambda_max + (lambda_max * lambda_max + x * x).sqrt());
            Ok(s / (1.0 - q))
        }
        Regime::RealTime => {
            let q = x / (2.0 * (lambda_max + 1.0));
            if q >= 1.0 {
                return Ok(f64::INFINITY);
            }
            let ln_first = lambda_max * (0.5 * x).ln() - crate::special::log_gamma(lambda_max + 1.0)?;
            Ok(ln_first.exp() / (1.0 - q))
        }
    }
}

/// Sector propagator `K_n` as the λ-integral over `B_{|λ|}(r'r''/T)`, folded
/// onto `[0, Λ]` by evenness in `λ`.
pub fn sector_k(
    sector: SectorLabel,
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    quad: &QuadratureSpec,
) -> Result<PropagatorValue> {
    quad.validate()?;
    let x = src.r() * dst.r() / mode.time();
    let delta = sector.delta_theta(src.theta(), dst.theta());
    let lambda_max = quad.upper_limit.unwrap_or_else(|| default_lambda_max(x));
    let regime = mode.regime();

    let failed = FailedOrder::default();
    let integrand = |lambda: f64| match bessel_kernel(lambda, x, regime) {
        Ok(b) => b * (lambda * delta).cos(),
        Err(_) => {
            failed.record(lambda);
            ZERO
        }
    };
    let q = integrate(&integrand, 0.0, lambda_max, quad);
    if let Some(nu) = failed.get() {
        bessel_kernel(nu, x, regime)?;
        return Err(Error::NonConvergence {
            routine: "sector λ-integrand",
            x,
            order: nu,
            terms: 0,
        });
    }
    let pre = bessel_prefactor(PI, &src, &dst, &mode);
    let q = q.map_err(|e| match e {
        Error::Quadrature {
            estimate,
            error_estimate,
            tolerance,
        } => Error::Quadrature {
            estimate: estimate * pre,
            error_estimate: error_estimate * pre.norm(),
            tolerance: tolerance * pre.norm(),
        },
        other => other,
    })?;
    let tail = lambda_tail_bound(lambda_max, x, regime)?;
    Ok(PropagatorValue {
        amplitude: q.value * pre,
        error_estimate: (q.error_estimate + tail) * pre.norm(),
        terms_used: q.evaluations,
    })
}

/// `Σ e^{-inα} K_n` over the supplied sectors, which must share one period.
pub fn sector_sum(alpha: StatisticsAngle, sectors: &[(SectorLabel, PropagatorValue)]) -> Result<PropagatorValue> {
    let mut period: Option<Period> = None;
    let mut total = PropagatorValue {
        amplitude: ZERO,
        error_estimate: 0.0,
        terms_used: 0,
    };
    for (label, value) in sectors {
        match period {
            None => period = Some(label.period),
            Some(p) if p != label.period => return Err(Error::MixedPeriods),
            Some(_) => {}
        }
        total.amplitude += alpha.sector_weight(label.n) * value.amplitude;
        total.error_estimate += value.error_estimate;
        total.terms_used += value.terms_used;
    }
    Ok(total)
}

/// Truncation of the two circle sums: terms with `|n - n₀| ≤ n_max` are kept,
/// `n₀` being the index nearest the peak of the summand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleCutoff {
    pub n_max: usize,
    pub rel_tol: f64,
}

impl Default for CircleCutoff {
    fn default() -> Self {
        CircleCutoff {
            n_max: 30,
            rel_tol: 1e-12,
        }
    }
}

/// `Σ_{k ∈ K} e^{-a (k - c)²}` over the integers outside `[lo, hi]`, an upper
/// bound built from the first dropped term on each side and the Gaussian
/// ratio, which only shrinks further out.
fn gaussian_tail(a: f64, c: f64, lo: f64, hi: f64) -> f64 {
    let side = |d: f64| {
        // d is the distance from the peak to the first dropped index
        if d <= 0.0 {
            return f64::INFINITY;
        }
        let first = (-a * d * d).exp();
        let q = (-a * (2.0 * d + 1.0)).exp();
        first / (1.0 - q)
    };
    side(hi + 1.0 - c) + side(c - (lo - 1.0))
}

fn circle_mode_check(r: f64, mode: &TimeMode, what: &'static str) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain {
            what: "circle radius",
            value: r,
        });
    }
    if mode.regime() == Regime::RealTime {
        return Err(Error::Divergent { what });
    }
    Ok(())
}

fn finish_circle(
    amplitude: Complex64,
    tail: f64,
    terms: usize,
    cutoff: &CircleCutoff,
    needed: f64,
) -> Result<PropagatorValue> {
    if !(cutoff.rel_tol > 0.0) || cutoff.n_max < 1 {
        return Err(Error::InvalidConfig("circle cutoff needs n_max ≥ 1 and rel_tol > 0"));
    }
    if tail > cutoff.rel_tol * amplitude.norm() {
        return Err(Error::Truncation {
            partial: amplitude,
            tail_estimate: tail,
            terms,
            suggested_terms: Some(needed.ceil().max(cutoff.n_max as f64 + 1.0) as usize),
        });
    }
    Ok(PropagatorValue {
        amplitude,
        error_estimate: tail,
        terms_used: terms,
    })
}

/// Particle on a circle of radius `R` threaded by a flux, as the sum over
/// windings `n` of free one-dimensional propagators weighted by `e^{-inα}`.
///
/// The winding index runs over `|n| ≤ n_max`. Only Euclidean mode is
/// available: in real time the Gaussians become pure phases and neither this
/// sum nor its dual converges absolutely.
pub fn circle_flux(
    theta_src: f64,
    theta_dst: f64,
    radius: f64,
    alpha: StatisticsAngle,
    mode: TimeMode,
    cutoff: &CircleCutoff,
) -> Result<PropagatorValue> {
    circle_mode_check(radius, &mode, "real-time winding sum on the circle")?;
    let t = mode.time();
    let delta = theta_dst - theta_src;
    let norm = 1.0 / (2.0 * PI * t).sqrt();
    let a = radius * radius / (2.0 * t);
    let n_max = cutoff.n_max as i64;
    let mut sum = ZERO;
    for n in -n_max..=n_max {
        let u = delta + 2.0 * PI * n as f64;
        sum += alpha.sector_weight(n) * (-a * u * u).exp();
    }
    // summand as a Gaussian in n: e^{-a(2π)²(n - c)²} with c = -Δ/2π
    let c = -delta / (2.0 * PI);
    let a_n = a * 4.0 * PI * PI;
    let tail = gaussian_tail(a_n, c, -(n_max as f64), n_max as f64) * norm;
    let sum = sum * norm;
    let needed = c.abs() + (cutoff.rel_tol.recip().ln().max(1.0) / a_n).sqrt() + 1.0;
    finish_circle(sum, tail, 2 * cutoff.n_max + 1, cutoff, needed)
}

/// Poisson dual of [`circle_flux`]: `(1/2πR) Σ_k e^{i(k+a)Δ} e^{-(k+a)²T/2R²}`
/// with `a = α/2π`, over `|k - k₀| ≤ n_max` with `k₀ = -round(a)`.
pub fn circle_flux_momentum(
    theta_src: f64,
    theta_dst: f64,
    radius: f64,
    alpha: StatisticsAngle,
    mode: TimeMode,
    cutoff: &CircleCutoff,
) -> Result<PropagatorValue> {
    circle_mode_check(radius, &mode, "real-time momentum sum on the circle")?;
    let t = mode.time();
    let delta = theta_dst - theta_src;
    let shift = alpha.radians() / (2.0 * PI);
    let k0 = -shift.round() as i64;
    let b = t / (2.0 * radius * radius);
    let n_max = cutoff.n_max as i64;
    let mut sum = ZERO;
    let mut magnitude = 0.0;
    for k in (k0 - n_max)..=(k0 + n_max) {
        let p = k as f64 + shift;
        let g = (-b * p * p).exp();
        sum += Complex64::cis(p * delta) * g;
        magnitude += g;
    }
    let norm = 1.0 / (2.0 * PI * radius);
    let tail = gaussian_tail(b, -shift, (k0 - n_max) as f64, (k0 + n_max) as f64) * norm;
    let sum = sum * norm;
    let needed = 1.0 + (cutoff.rel_tol.recip().ln().max(1.0) / b).sqrt();
    let mut value = finish_circle(sum, tail, 2 * cutoff.n_max + 1, cutoff, needed)?;
    // the oscillating terms cancel for Δ near π at small T; rounding then
    // dominates the relative error
    value.error_estimate += 8.0 * f64::EPSILON * magnitude * norm;
    Ok(value)
}
