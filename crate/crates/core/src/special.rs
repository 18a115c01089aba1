//! Modified Bessel functions of real, non-negative order.
//!
//! Only the two argument rays the propagators need are supported:
//!
//! * the positive real axis, where `I_ν(x)` is carried in the overflow-safe
//!   scaled form `e^{-x} I_ν(x)`, and
//! * the negative imaginary axis, reached through the continuation
//!   `I_ν(-ix) = e^{-iπν/2} J_ν(x)`.
//!
//! `I_ν` switches between the ascending power series and the large-argument
//! Hankel expansion at [`asymptotic_threshold`]. `J_ν` adds a third branch,
//! Steed's continued-fraction method, for the transition region where the
//! alternating series cancels and the Hankel expansion has not yet set in.

use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4; // ln(1e250)
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Order of a Bessel function; finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(BesselOrder(nu))
        } else {
            Err(Error::Domain {
                what: "Bessel order",
                value: nu,
            })
        }
    }

    /// Order `|nu|`, the form in which orders appear in every propagator.
    pub fn abs(nu: f64) -> Result<Self> {
        Self::new(nu.abs())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `I_ν(x) = value · e^{scaling}`, with `scaling = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub value: f64,
    pub scaling: f64,
}

impl ScaledBesselValue {
    /// The unscaled value; overflows to infinity beyond `x ≈ 709`.
    pub fn unscaled(self) -> f64 {
        self.value * self.scaling.exp()
    }

    /// `ln I_ν(x)`, finite whenever `value > 0`.
    pub fn ln(self) -> f64 {
        self.value.ln() + self.scaling
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`, by the Lanczos approximation (g = 7, nine terms).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            what: "log_gamma argument",
            value: x,
        });
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_positive(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// Argument at which both `I_ν` and `J_ν` hand over to the Hankel expansion.
///
/// The expansion in powers of `(4ν² - (2k-1)²) / 8x` is only free of
/// cancellation while `ν²` stays well below `x`, hence the `2ν²` term.
pub fn asymptotic_threshold(nu: f64) -> f64 {
    (2.0 * nu * nu).max(30.0)
}

/// `e^{-x} I_ν(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<ScaledBesselValue> {
    check_argument(x)?;
    let nu = order.0;
    let value = if x < asymptotic_threshold(nu) {
        i_series_scaled(nu, x)?
    } else {
        i_hankel_scaled(nu, x)?
    };
    Ok(ScaledBesselValue { value, scaling: x })
}

/// Ascending-series branch of [`bessel_i_scaled`], valid for any `x ≥ 0`
/// (at a cost of roughly `x/2` terms). Exposed for seam checks.
pub fn bessel_i_scaled_series(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    i_series_scaled(order.0, x)
}

/// Hankel-expansion branch of [`bessel_i_scaled`]. Exposed for seam checks;
/// fails with [`Error::NonConvergence`] where the expansion cannot reach
/// double precision.
pub fn bessel_i_scaled_hankel(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    if x == 0.0 {
        return Err(Error::Domain {
            what: "Hankel expansion argument",
            value: x,
        });
    }
    i_hankel_scaled(order.0, x)
}

fn check_argument(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "Bessel argument",
            value: x,
        })
    }
}

fn series_budget(nu: f64, x: f64) -> usize {
    2_000 + 4 * (x + nu) as usize
}

fn i_series_scaled(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let q = 0.25 * x * x;
    let budget = series_budget(nu, x);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut log_shift = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        if k > budget {
            return Err(Error::NonConvergence {
                routine: "bessel_i series",
                x,
                order: nu,
                terms: k,
            });
        }
        let kf = k as f64;
        let denom = kf * (kf + nu);
        term *= q / denom;
        sum += term;
        if denom > q && term <= 0.5 * EPS * sum {
            break;
        }
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_shift += LN_RESCALE;
        }
    }
    let log_prefix = nu * (0.5 * x).ln() - ln_gamma_positive(nu + 1.0) - x + log_shift;
    Ok(scaled_product(log_prefix, sum))
}

/// `e^{log_prefix} · sum` without spurious overflow or underflow.
fn scaled_product(log_prefix: f64, sum: f64) -> f64 {
    if log_prefix > -700.0 && log_prefix < 700.0 {
        log_prefix.exp() * sum
    } else {
        (log_prefix + sum.ln()).exp()
    }
}

/// Successive Hankel coefficients `a_k(ν) / x^k`; `None` marks a terminating
/// series (half-integer order).
struct HankelTerms {
    mu: f64,
    x: f64,
    k: usize,
    term: f64,
}

impl HankelTerms {
    fn new(nu: f64, x: f64) -> Self {
        HankelTerms {
            mu: 4.0 * nu * nu,
            x,
            k: 0,
            term: 1.0,
        }
    }
}

impl Iterator for HankelTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.k += 1;
        let odd = (2 * self.k - 1) as f64;
        self.term *= (self.mu - odd * odd) / (8.0 * self.k as f64 * self.x);
        if self.term == 0.0 {
            None
        } else {
            Some(self.term)
        }
    }
}

const HANKEL_MAX_TERMS: usize = 400;

fn i_hankel_scaled(nu: f64, x: f64) -> Result<f64> {
    let mut sum = 1.0_f64;
    let mut sign = -1.0;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut used = 0;
    let mut terms = HankelTerms::new(nu, x);
    for k in 1..=HANKEL_MAX_TERMS {
        used = k;
        let Some(b) = terms.next() else {
            converged = true;
            break;
        };
        let a = b.abs();
        if a > prev {
            break;
        }
        sum += sign * b;
        sign = -sign;
        prev = a;
        if a <= 0.5 * EPS * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged && prev > 1e-14 * sum.abs() && prev.is_finite() {
        return Err(Error::NonConvergence {
            routine: "bessel_i Hankel expansion",
            x,
            order: nu,
            terms: used,
        });
    }
    Ok(sum / (2.0 * PI * x).sqrt())
}

/// `J_ν(x)` for `x ≥ 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    let nu = order.0;
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x < 2.0 || x * x <= 2.0 * (nu + 1.0) {
        j_series(nu, x)
    } else if x >= asymptotic_threshold(nu) {
        j_hankel(nu, x)
    } else {
        j_steed(nu, x)
    }
}

/// `I_ν(-ix) = e^{-iπν/2} J_ν(x)`, the real-time Bessel kernel.
pub fn bessel_i_negative_imaginary(order: BesselOrder, x: f64) -> Result<Complex64> {
    let j = bessel_j(order, x)?;
    Ok(j * quarter_turns(-order.0))
}

/// `e^{iπν/2}` with the phase reduced modulo 4 before scaling by π/2.
pub(crate) fn quarter_turns(nu: f64) -> Complex64 {
    let reduced = nu - 4.0 * (nu / 4.0).floor();
    let whole = reduced.floor();
    let z = Complex64::cis((reduced - whole) * FRAC_PI_2);
    // whole quarter turns are applied exactly
    match whole as i32 {
        0 => z,
        1 => Complex64::new(-z.im, z.re),
        2 => -z,
        _ => Complex64::new(z.im, -z.re),
    }
}

fn j_series(nu: f64, x: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    let budget = series_budget(nu, x);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0usize;
    loop {
        k += 1;
        if k > budget {
            return Err(Error::NonConvergence {
                routine: "bessel_j series",
                x,
                order: nu,
                terms: k,
            });
        }
        let kf = k as f64;
        let denom = kf * (kf + nu);
        term *= -q / denom;
        sum += term;
        if denom > q && term.abs() <= 0.5 * EPS * sum.abs() {
            break;
        }
    }
    let log_prefix = nu * (0.5 * x).ln() - ln_gamma_positive(nu + 1.0);
    Ok(scaled_product(log_prefix, sum.abs()).copysign(sum))
}

fn j_hankel(nu: f64, x: f64) -> Result<f64> {
    // P = b0 - b2 + b4 - ..., Q = b1 - b3 + b5 - ...
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut used = 0;
    let mut terms = HankelTerms::new(nu, x);
    for k in 1..=HANKEL_MAX_TERMS {
        used = k;
        let Some(b) = terms.next() else {
            converged = true;
            break;
        };
        let a = b.abs();
        if a > prev {
            break;
        }
        prev = a;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q += sign * b;
        }
        if a <= 0.5 * EPS * (p.abs() + q.abs()) {
            converged = true;
            break;
        }
    }
    if !converged && prev > 1e-14 * (p.abs() + q.abs()) && prev.is_finite() {
        return Err(Error::NonConvergence {
            routine: "bessel_j Hankel expansion",
            x,
            order: nu,
            terms: used,
        });
    }
    // χ = x - (ν/2 + 1/4)π, expanded so that x itself is reduced by libm.
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = (x.sin(), x.cos());
    let (sp, cp) = (phase.sin(), phase.cos());
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Ok((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Steed's method: CF1 for `J'_ν/J_ν`, downward recurrence to an order
/// `μ ≲ x`, CF2 for `(J'_μ + iY'_μ)/(J_μ + iY_μ)`, and the Wronskian for the
/// normalization. Requires `x ≥ 2`.
fn j_steed(nu: f64, x: f64) -> Result<f64> {
    const FPMIN: f64 = 1e-300;
    const START: f64 = 1e-30;
    let nl = if nu > x - 1.5 {
        (nu - x + 1.5).floor() as usize
    } else {
        0
    };
    let mu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;
    let budget = 10_000 + 4 * x as usize;

    // CF1 by the modified Lentz method.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0_f64;
    let mut c = h;
    let mut converged = false;
    for _ in 0..budget {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            routine: "bessel_j CF1",
            x,
            order: nu,
            terms: budget,
        });
    }

    let mut rjl = isign * START;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut log_shift = 0.0;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE {
            rjl /= RESCALE;
            rjpl /= RESCALE;
            log_shift += LN_RESCALE;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2 (Steed), written out in real arithmetic.
    let mu2 = mu * mu;
    let mut a = 0.25 - mu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..budget {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            routine: "bessel_j CF2",
            x,
            order: nu,
            terms: budget,
        });
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let scale = rjmu / rjl;
    Ok(scaled_product(scale.abs().ln() - log_shift, rjl1.abs()).copysign(rjl1 * scale))
}

/// `Σ_{m=-m_max}^{m_max} I_m(x)`, accumulated in scaled form. Tends to `e^x`.
pub fn bessel_i_generating_sum(x: f64, m_max: usize) -> Result<f64> {
    Ok(bessel_i_generating_sum_scaled(x, m_max)? * x.exp())
}

/// `e^{-x} Σ_{m=-m_max}^{m_max} I_m(x)`; tends to 1.
pub fn bessel_i_generating_sum_scaled(x: f64, m_max: usize) -> Result<f64> {
    let mut tail = 0.0;
    // smallest terms first
    for m in (1..=m_max).rev() {
        tail += bessel_i_scaled(BesselOrder(m as f64), x)?.value;
    }
    Ok(bessel_i_scaled(BesselOrder(0.0), x)?.value + 2.0 * tail)
}
