//! Winding-number histogram of Brownian bridges around the origin.
//!
//! Each bridge from `r'` to `r''` over time `T` is sampled at `steps` points
//! (increments of variance `ε = T/steps` per coordinate, the unit-mass
//! Euclidean kernel). The angle is unwound along the chords, and a chord is
//! trusted only if it stays at least [`WindingConfig::chord_clearance`]`·√τ`
//! from the origin, `τ` being its duration. Closer chords are refined by
//! Lévy midpoint insertion. Refinement works in coordinates scaled by
//! `1/√τ`, so arbitrarily close approaches cost depth but never precision.
//!
//! Planar Brownian motion approaches the origin to within `δ` with
//! probability of order `1/ln(1/δ)`, so the refinement depth has a heavy
//! tail. Paths still unresolved at [`WindingConfig::max_depth`] are counted
//! separately (they are overwhelmingly large-`|n|` paths). Only if they
//! exceed [`WindingConfig::max_unresolved_fraction`] is the run rejected.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{Period, PolarPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingConfig {
    pub period: Period,
    /// Samples per independently seeded block; part of the determinism
    /// contract, so results do not depend on the thread count.
    pub block_size: usize,
    pub max_depth: u32,
    /// Minimum distance of a trusted chord from the origin, in units of `√τ`.
    pub chord_clearance: f64,
    pub max_unresolved_fraction: f64,
}

impl Default for WindingConfig {
    fn default() -> Self {
        WindingConfig {
            period: Period::TwoPi,
            block_size: 4096,
            max_depth: 512,
            chord_clearance: 3.0,
            max_unresolved_fraction: 5e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorCount {
    pub count: u64,
    pub probability: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindingHistogram {
    pub counts: BTreeMap<i64, SectorCount>,
    /// Classified samples; probabilities are relative to this.
    pub samples: u64,
    pub unresolved: u64,
    pub seed: u64,
    pub period: Period,
    /// Chords that needed midpoint refinement, and the deepest level used.
    pub refinements: u64,
    pub deepest: u32,
}

impl WindingHistogram {
    pub fn probability(&self, n: i64) -> f64 {
        self.counts.get(&n).map_or(0.0, |c| c.probability)
    }

    /// `P(n)/P(0)` and its standard error from the multinomial covariance,
    /// `σ² = ratio² (1/p_n + 1/p_0)/samples`.
    pub fn ratio_to_zero(&self, n: i64) -> Option<(f64, f64)> {
        let p0 = self.probability(0);
        let pn = self.probability(n);
        if p0 == 0.0 || pn == 0.0 {
            return None;
        }
        let ratio = pn / p0;
        let sigma = ratio * ((1.0 / pn + 1.0 / p0) / self.samples as f64).sqrt();
        Some((ratio, sigma))
    }
}

type V2 = (f64, f64);

fn normal_pair(rng: &mut ChaCha8Rng) -> V2 {
    (rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Whether the chord `[u, v]` stays at least `c` from the origin.
fn chord_clear(u: V2, v: V2, c: f64) -> bool {
    let d = (v.0 - u.0, v.1 - u.1);
    let len2 = d.0 * d.0 + d.1 * d.1;
    let t = -(u.0 * d.0 + u.1 * d.1);
    let c2 = c * c;
    if t <= 0.0 {
        u.0 * u.0 + u.1 * u.1 >= c2
    } else if t >= len2 {
        v.0 * v.0 + v.1 * v.1 >= c2
    } else {
        let cross = u.0 * v.1 - u.1 * v.0;
        cross * cross >= c2 * len2
    }
}

/// Signed crossing of the branch cut of `atan2` (the negative real axis) by
/// the chord `[u, v]`: `+1` passing clockwise, `-1` counter-clockwise.
/// Signed zeros follow `atan2`, so the principal angles of the endpoints
/// differ from the swept angle by exactly `2π` times this count.
fn cut_crossing(u: V2, v: V2) -> i64 {
    let (below_u, below_v) = (u.1.is_sign_negative(), v.1.is_sign_negative());
    if below_u == below_v {
        return 0;
    }
    let cross = u.0 * v.1 - u.1 * v.0;
    match (below_u, cross < 0.0) {
        (true, true) => 1,
        (false, false) => -1,
        _ => 0,
    }
}

struct Walker<'a> {
    cfg: &'a WindingConfig,
    stack: Vec<(V2, V2, u32)>,
    refinements: u64,
    deepest: u32,
}

impl Walker<'_> {
    /// Net branch-cut crossings of a bridge segment whose endpoints are
    /// already scaled by `1/√τ`; `None` if refinement ran past `max_depth`.
    fn segment(&mut self, u: V2, v: V2, rng: &mut ChaCha8Rng) -> Option<i64> {
        let clearance = self.cfg.chord_clearance;
        if chord_clear(u, v, clearance) {
            return Some(cut_crossing(u, v));
        }
        let mut crossings = 0;
        let mut resolved = true;
        self.stack.clear();
        self.stack.push((u, v, 0));
        while let Some((a, b, depth)) = self.stack.pop() {
            if chord_clear(a, b, clearance) {
                crossings += cut_crossing(a, b);
                continue;
            }
            if depth >= self.cfg.max_depth {
                resolved = false;
                continue;
            }
            self.refinements += 1;
            self.deepest = self.deepest.max(depth + 1);
            // bridge midpoint: mean (a+b)/2, variance τ/4 per coordinate
            let z = normal_pair(rng);
            let m = (0.5 * (a.0 + b.0) + 0.5 * z.0, 0.5 * (a.1 + b.1) + 0.5 * z.1);
            let s = |p: V2| (SQRT_2 * p.0, SQRT_2 * p.1);
            self.stack.push((s(m), s(b), depth + 1));
            self.stack.push((s(a), s(m), depth + 1));
        }
        resolved.then_some(crossings)
    }
}

#[derive(Default)]
struct Tally {
    counts: BTreeMap<i64, u64>,
    classified: u64,
    unresolved: u64,
    first_unresolved: Option<(u64, u32)>,
    refinements: u64,
    deepest: u32,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (n, c) in other.counts {
            *self.counts.entry(n).or_insert(0) += c;
        }
        self.classified += other.classified;
        self.unresolved += other.unresolved;
        self.first_unresolved = self.first_unresolved.or(other.first_unresolved);
        self.refinements += other.refinements;
        self.deepest = self.deepest.max(other.deepest);
        self
    }
}

struct Problem {
    start: V2,
    end: V2,
    image: V2,
    /// Probability of ending at `r''` rather than `-r''` (period π only).
    p_direct: f64,
    theta_src: f64,
    theta_dst: f64,
    period: f64,
    steps: usize,
    eps: f64,
}

fn run_block(problem: &Problem, cfg: &WindingConfig, seed: u64, block: u64, first: u64, count: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut walker = Walker {
        cfg,
        stack: Vec::new(),
        refinements: 0,
        deepest: 0,
    };
    let mut tally = Tally::default();
    let inv = 1.0 / problem.eps.sqrt();
    for i in 0..count {
        let end = if problem.p_direct >= 1.0 || rng.random::<f64>() < problem.p_direct {
            problem.end
        } else {
            problem.image
        };
        let mut x = problem.start;
        let mut crossings = 0;
        let mut resolved = true;
        for k in 0..problem.steps {
            let remaining = (problem.steps - k) as f64;
            let next = if k + 1 == problem.steps {
                end
            } else {
                let sd = (problem.eps * (remaining - 1.0) / remaining).sqrt();
                let z = normal_pair(&mut rng);
                (
                    x.0 + (end.0 - x.0) / remaining + sd * z.0,
                    x.1 + (end.1 - x.1) / remaining + sd * z.1,
                )
            };
            let u = (x.0 * inv, x.1 * inv);
            let v = (next.0 * inv, next.1 * inv);
            match walker.segment(u, v, &mut rng) {
                Some(c) => crossings += c,
                None => resolved = false,
            }
            x = next;
        }
        if resolved {
            let swept = end.1.atan2(end.0) - problem.start.1.atan2(problem.start.0) - 2.0 * PI * crossings as f64;
            let n = ((problem.theta_src + swept - problem.theta_dst) / problem.period).round() as i64;
            *tally.counts.entry(n).or_insert(0) += 1;
            tally.classified += 1;
        } else {
            tally.unresolved += 1;
            tally.first_unresolved.get_or_insert((first + i, cfg.max_depth));
        }
    }
    tally.refinements = walker.refinements;
    tally.deepest = walker.deepest;
    tally
}

/// Winding histogram for period `2π` with the default configuration.
pub fn brownian_winding_distribution(
    src: PolarPoint,
    dst: PolarPoint,
    time: f64,
    samples: u64,
    steps: usize,
    seed: u64,
) -> Result<WindingHistogram> {
    brownian_winding_distribution_with(src, dst, time, samples, steps, seed, &WindingConfig::default())
}

/// Winding histogram of Brownian bridges from `src` to `dst`.
///
/// For period `π` (two identical particles, relative coordinate) each path
/// ends at `r''` or at `-r''` with probability proportional to the free
/// kernel, and sectors count half-turns.
pub fn brownian_winding_distribution_with(
    src: PolarPoint,
    dst: PolarPoint,
    time: f64,
    samples: u64,
    steps: usize,
    seed: u64,
    cfg: &WindingConfig,
) -> Result<WindingHistogram> {
    if !(time > 0.0 && time.is_finite()) {
        return Err(Error::Domain {
            what: "time",
            value: time,
        });
    }
    if samples < 1 {
        return Err(Error::InvalidConfig("at least one sample is required"));
    }
    if steps < 16 {
        return Err(Error::InvalidConfig("at least 16 steps are required"));
    }
    if cfg.block_size < 1 || !(cfg.chord_clearance > 0.0) {
        return Err(Error::InvalidConfig(
            "winding block size and chord clearance must be positive",
        ));
    }
    let end = dst.to_cartesian();
    let image = (-end.0, -end.1);
    let start = src.to_cartesian();
    let p_direct = match cfg.period {
        Period::TwoPi => 1.0,
        Period::Pi => {
            let d2 = |e: V2| (e.0 - start.0).powi(2) + (e.1 - start.1).powi(2);
            let (a, b) = (d2(end), d2(image));
            // e^{-a/2T} / (e^{-a/2T} + e^{-b/2T})
            1.0 / (1.0 + ((a - b) / (2.0 * time)).exp())
        }
    };
    let problem = Problem {
        start,
        end,
        image,
        p_direct,
        theta_src: src.theta(),
        theta_dst: dst.theta(),
        period: cfg.period.radians(),
        steps,
        eps: time / steps as f64,
    };
    let block = cfg.block_size as u64;
    let blocks = samples.div_ceil(block);
    let job = |b: u64| {
        let first = b * block;
        run_block(&problem, cfg, seed, b, first, block.min(samples - first))
    };
    #[cfg(feature = "parallel")]
    let tallies: Vec<Tally> = (0..blocks).into_par_iter().map(job).collect();
    #[cfg(not(feature = "parallel"))]
    let tallies: Vec<Tally> = (0..blocks).map(job).collect();
    let tally = tallies.into_iter().fold(Tally::default(), Tally::merge);

    if tally.unresolved as f64 > cfg.max_unresolved_fraction * samples as f64 || tally.classified == 0 {
        let (sample, depth) = tally.first_unresolved.unwrap_or((0, cfg.max_depth));
        return Err(Error::Sampling { sample, depth });
    }
    let total = tally.classified as f64;
    let counts = tally
        .counts
        .iter()
        .map(|(&n, &count)| {
            let p = count as f64 / total;
            (
                n,
                SectorCount {
                    count,
                    probability: p,
                    std_error: (p * (1.0 - p) / total).sqrt(),
                },
            )
        })
        .collect();
    Ok(WindingHistogram {
        counts,
        samples: tally.classified,
        unresolved: tally.unresolved,
        seed,
        period: cfg.period,
        refinements: tally.refinements,
        deepest: tally.deepest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64, t: f64) -> PolarPoint {
        PolarPoint::new(r, t).unwrap()
    }

    #[test]
    fn chord_geometry() {
        assert!(chord_clear((-1.0, 1.0), (1.0, 1.0), 0.99));
        assert!(!chord_clear((-1.0, 1.0), (1.0, 1.0), 1.01));
        assert!(chord_clear((2.0, 0.0), (3.0, 0.0), 1.99));
        assert!(!chord_clear((2.0, 0.0), (3.0, 0.0), 2.01));
        assert!(!chord_clear((-3.0, 0.0), (-2.0, 0.0), 2.01));
    }

    #[test]
    fn crossings_follow_atan2_cut() {
        assert_eq!(cut_crossing((-1.0, -0.1), (-1.0, 0.1)), 1);
        assert_eq!(cut_crossing((-1.0, 0.1), (-1.0, -0.1)), -1);
        assert_eq!(cut_crossing((1.0, -0.1), (1.0, 0.1)), 0);
        // a polygon once around the origin counter-clockwise
        let square = [(1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
        let total: i64 = square.windows(2).map(|w| cut_crossing(w[0], w[1])).sum();
        assert_eq!(total, -1);
    }

    #[test]
    fn distant_short_bridge_never_winds() {
        let h = brownian_winding_distribution(p(10.0, 0.3), p(10.0, 0.3), 0.1, 20_000, 16, 3).unwrap();
        assert!(h.probability(0) > 0.999);
        let total: f64 = h.counts.values().map(|c| c.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_seed_identical_histogram() {
        let a = brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), 1.0, 5_000, 32, 11).unwrap();
        let b = brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), 1.0, 5_000, 32, 11).unwrap();
        assert_eq!(a, b);
        let c = brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), 1.0, 5_000, 32, 12).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), 1.0, 0, 32, 1).is_err());
        assert!(brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), 1.0, 10, 15, 1).is_err());
        assert!(brownian_winding_distribution(p(1.0, 0.0), p(1.0, 0.0), -1.0, 10, 32, 1).is_err());
    }

    #[test]
    fn depth_limit_surfaces_as_sampling_error() {
        let cfg = WindingConfig {
            max_depth: 0,
            max_unresolved_fraction: 0.0,
            ..WindingConfig::default()
        };
        let r = brownian_winding_distribution_with(p(0.05, 0.0), p(0.05, 1.0), 1.0, 100, 16, 1, &cfg);
        assert!(matches!(r, Err(Error::Sampling { .. })), "{r:?}");
    }

    #[test]
    fn half_period_reaches_odd_sectors() {
        let cfg = WindingConfig {
            period: Period::Pi,
            ..WindingConfig::default()
        };
        let h = brownian_winding_distribution_with(p(1.0, 0.0), p(1.0, 0.0), 1.0, 4_000, 32, 5, &cfg).unwrap();
        assert!(h.probability(1) + h.probability(-1) > 0.05);
    }
}
