//! Adaptive Gauss–Legendre quadrature for smooth, possibly oscillatory,
//! complex-valued integrands on a finite interval.
//!
//! The interval is first cut into panels no wider than
//! [`QuadratureSpec::panel_width`]; each panel is then bisected until the
//! two-half estimate agrees with the whole-panel estimate to within the
//! panel's share of the tolerance. The reported error is the sum of those
//! last refinement deltas.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Tolerance relative to `∫|f|` over the whole interval.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Upper bound on the width of the initial panels.
    pub panel_width: f64,
    /// Overrides the default upper integration limit where a caller has one.
    pub upper_limit: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 16,
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_depth: 24,
            panel_width: 1.0,
            upper_limit: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidConfig("quadrature order must be at least 2"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0) {
            return Err(Error::InvalidConfig("quadrature tolerances must be positive"));
        }
        if !(self.panel_width > 0.0 && self.panel_width.is_finite()) {
            return Err(Error::InvalidConfig("panel width must be positive"));
        }
        if let Some(limit) = self.upper_limit {
            if !(limit > 0.0 && limit.is_finite()) {
                return Err(Error::InvalidConfig("upper limit must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, p_prev) = legendre(n, z);
                dp = nf * (z * p - p_prev) / (z * z - 1.0);
                let step = p / dp;
                z -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (p, p_prev) = legendre(n, z);
            dp = if p.is_finite() {
                nf * (z * p - p_prev) / (z * z - 1.0)
            } else {
                dp
            };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Returns `(∫f, ∫|f|)` over `[a, b]`.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> (Complex64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            sum += v * *w;
            abs += v.norm() * w;
        }
        (sum * half, abs * half.abs())
    }
}

/// `(P_n(z), P_{n-1}(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut p_prev = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * z * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

struct Panel {
    value: Complex64,
    error: f64,
    evaluations: usize,
    resolved: bool,
}

/// Integrates `f` over `[a, b]` under `spec`; `spec.upper_limit` is ignored
/// here (callers resolve it into `b`).
pub fn integrate<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(Error::InvalidConfig("quadrature interval must be finite and ordered"));
    }
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let rule = GaussLegendre::new(spec.order);
    let count = ((b - a) / spec.panel_width).ceil().max(1.0) as usize;
    let width = (b - a) / count as f64;
    let edges: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == count { b } else { lo + width };
            (lo, hi)
        })
        .collect();

    #[cfg(feature = "parallel")]
    let coarse: Vec<(Complex64, f64)> = edges.par_iter().map(|&(lo, hi)| rule.apply(f, lo, hi)).collect();
    #[cfg(not(feature = "parallel"))]
    let coarse: Vec<(Complex64, f64)> = edges.iter().map(|&(lo, hi)| rule.apply(f, lo, hi)).collect();

    let scale: f64 = coarse.iter().map(|c| c.1).sum();
    let tol = spec.abs_tol.max(spec.rel_tol * scale);
    let total = b - a;
    let refine_one = |(&(lo, hi), &(value, _)): (&(f64, f64), &(Complex64, f64))| {
        refine(f, &rule, lo, hi, value, tol * (hi - lo) / total, spec.max_depth)
    };

    #[cfg(feature = "parallel")]
    let panels: Vec<Panel> = edges.par_iter().zip(coarse.par_iter()).map(refine_one).collect();
    #[cfg(not(feature = "parallel"))]
    let panels: Vec<Panel> = edges.iter().zip(coarse.iter()).map(refine_one).collect();

    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = count * spec.order;
    let mut resolved = true;
    for p in &panels {
        value += p.value;
        error += p.error;
        evaluations += p.evaluations;
        resolved &= p.resolved;
    }
    if !resolved && error > tol {
        return Err(Error::Quadrature {
            estimate: value,
            error_estimate: error,
            tolerance: tol,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
        evaluations,
    })
}

fn refine<F>(f: &F, rule: &GaussLegendre, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    let mid = 0.5 * (a + b);
    let (left, left_abs) = rule.apply(f, a, mid);
    let (right, right_abs) = rule.apply(f, mid, b);
    let fine = left + right;
    let delta = (fine - whole).norm();
    let evaluations = 2 * rule.nodes.len();
    // a delta at rounding level cannot shrink under further bisection
    let noise = 16.0 * f64::EPSILON * (left_abs + right_abs);
    if delta <= tol.max(noise) || mid <= a || mid >= b {
        return Panel {
            value: fine,
            error: delta,
            evaluations,
            resolved: true,
        };
    }
    if depth == 0 {
        return Panel {
            value: fine,
            error: delta,
            evaluations,
            resolved: false,
        };
    }
    let l = refine(f, rule, a, mid, left, 0.5 * tol, depth - 1);
    let r = refine(f, rule, mid, b, right, 0.5 * tol, depth - 1);
    Panel {
        value: l.value + r.value,
        error: l.error + r.error,
        evaluations: evaluations + l.evaluations + r.evaluations,
        resolved: l.resolved && r.resolved,
    }
}
