use anyonprop_core::oracle::{
    brownian_winding_distribution_with, transfer_matrix_sectors, LatticeConfig, WindingConfig,
};
use anyonprop_core::types::principal_angle;
use anyonprop_core::{
    boson_fermion_k, flux_tube_k, free_2d, sector_k, two_anyon_k, Error, ExchangeSign, Period, PolarPoint,
    PropagatorValue, QuadratureSpec, SectorLabel, StatisticsAngle, TimeMode, TruncationPolicy, VERSION,
};
use num_complex::Complex64;

use crate::args::{Args, Command, PeriodArg, RegimeArg, SweepParam};
use crate::table::{num, Table};
use crate::CliError;

/// Validated numerical inputs shared by every command.
#[derive(Debug, Clone, Copy)]
struct Setup {
    src: PolarPoint,
    dst: PolarPoint,
    mode: TimeMode,
    alpha: StatisticsAngle,
    period: Period,
    trunc: TruncationPolicy,
    quad: QuadratureSpec,
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Configuration mistakes surface as usage errors, everything else as a
/// numerical failure.
fn numerical(e: Error) -> CliError {
    match e {
        Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
        e => CliError::Numerical(e.to_string()),
    }
}

impl Setup {
    fn build(args: &Args, r_dst: f64, theta_dst: f64, time: f64, alpha: f64) -> Result<Setup, CliError> {
        let src = PolarPoint::new(args.r_src.value, args.theta_src.value).map_err(usage)?;
        let dst = PolarPoint::new(r_dst, theta_dst).map_err(usage)?;
        let mode = match args.regime {
            RegimeArg::Euclidean => TimeMode::euclidean(time),
            RegimeArg::Realtime => TimeMode::real_time(time),
        }
        .map_err(usage)?;
        let alpha = StatisticsAngle::new(alpha).map_err(usage)?;
        let trunc = TruncationPolicy {
            rel_tol: args.rel_tol.value,
            ..TruncationPolicy::default()
        };
        trunc.validate().map_err(usage)?;
        let period = match args.period {
            PeriodArg::TwoPi => Period::TwoPi,
            PeriodArg::Pi => Period::Pi,
        };
        Ok(Setup {
            src,
            dst,
            mode,
            alpha,
            period,
            trunc,
            quad: QuadratureSpec::default(),
        })
    }

    fn from_args(args: &Args) -> Result<Setup, CliError> {
        Setup::build(
            args,
            args.r_dst.value,
            args.theta_dst.value,
            args.time.value,
            args.alpha.value,
        )
    }

    /// The series propagator whose sectors have this setup's period.
    fn series(&self) -> Result<PropagatorValue, Error> {
        match self.period {
            Period::TwoPi => flux_tube_k(self.alpha, self.src, self.dst, self.mode, &self.trunc),
            Period::Pi => two_anyon_k(self.alpha, self.src, self.dst, self.mode, &self.trunc),
        }
    }

    fn sector(&self, n: i64) -> Result<PropagatorValue, Error> {
        sector_k(
            SectorLabel::new(n, self.period),
            self.src,
            self.dst,
            self.mode,
            &self.quad,
        )
    }
}

fn metadata(t: &mut Table, args: &Args) {
    t.meta("anyonprop", VERSION);
    t.meta("command", format!("{:?}", args.command).to_lowercase());
    t.meta("r_src", &args.r_src);
    t.meta("theta_src", &args.theta_src);
    t.meta("theta_src.principal", num(principal_angle(args.theta_src.value)));
    t.meta("r_dst", &args.r_dst);
    t.meta("theta_dst", &args.theta_dst);
    t.meta("theta_dst.principal", num(principal_angle(args.theta_dst.value)));
    t.meta("time", &args.time);
    t.meta("regime", format!("{:?}", args.regime).to_lowercase());
    t.meta("alpha", &args.alpha);
    t.meta(
        "period",
        match args.period {
            PeriodArg::TwoPi => "2pi",
            PeriodArg::Pi => "pi",
        },
    );
    t.meta("n_max", args.n_max);
    t.meta("rel_tol", &args.rel_tol);
    t.meta("lattice_n", args.lattice_n);
    t.meta("grid_points", args.grid_points);
    t.meta("samples", args.samples);
    t.meta("steps", args.steps);
    t.meta("seed", args.seed);
    t.meta(
        "sweep",
        match args.sweep {
            SweepParam::Alpha => "alpha",
            SweepParam::Time => "time",
            SweepParam::RDst => "r-dst",
            SweepParam::ThetaDst => "theta-dst",
        },
    );
    t.meta("sweep_from", &args.sweep_from);
    t.meta("sweep_to", &args.sweep_to);
    t.meta("sweep_points", args.sweep_points);
    t.meta(
        "out",
        args.out.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
    );
}

pub fn run(args: &Args) -> Result<String, CliError> {
    let mut t = match args.command {
        Command::Eval => eval(args)?,
        Command::Sectors => sectors(args)?,
        Command::Sweep => sweep(args)?,
        Command::Oracle => oracle(args)?,
        Command::Winding => winding(args)?,
    };
    let mut inputs = Table::default();
    metadata(&mut inputs, args);
    t.prepend_meta(inputs);
    Ok(t.render())
}

fn value_cells(v: &PropagatorValue) -> Vec<String> {
    vec![
        num(v.amplitude.re),
        num(v.amplitude.im),
        num(v.amplitude.norm()),
        num(v.error_estimate),
        v.terms_used.to_string(),
    ]
}

fn eval(args: &Args) -> Result<Table, CliError> {
    let s = Setup::from_args(args)?;
    let mut t = Table::new(&["propagator", "re", "im", "abs", "error_estimate", "terms_used"]);
    let rows: [(&str, PropagatorValue); 5] = [
        (
            "flux_tube",
            flux_tube_k(s.alpha, s.src, s.dst, s.mode, &s.trunc).map_err(numerical)?,
        ),
        (
            "two_anyon",
            two_anyon_k(s.alpha, s.src, s.dst, s.mode, &s.trunc).map_err(numerical)?,
        ),
        (
            "boson_fermion_plus",
            boson_fermion_k(ExchangeSign::Symmetric, s.src, s.dst, s.mode),
        ),
        (
            "boson_fermion_minus",
            boson_fermion_k(ExchangeSign::Antisymmetric, s.src, s.dst, s.mode),
        ),
        ("free", free_2d(s.src, s.dst, s.mode)),
    ];
    for (name, v) in rows {
        let mut cells = vec![name.to_string()];
        cells.extend(value_cells(&v));
        t.row(cells);
    }
    Ok(t)
}

/// Sectors in the order 0, -1, 1, -2, 2, ...; every other partial sum is
/// symmetric in `n`.
fn sector_order(n_max: u32) -> Vec<i64> {
    let mut order = vec![0];
    for k in 1..=n_max as i64 {
        order.push(-k);
        order.push(k);
    }
    order
}

fn sectors(args: &Args) -> Result<Table, CliError> {
    let s = Setup::from_args(args)?;
    let target = s.series().map_err(numerical)?;
    let mut t = Table::new(&[
        "n",
        "k_re",
        "k_im",
        "k_error",
        "partial_re",
        "partial_im",
        "target_re",
        "target_im",
        "rel_deviation",
    ]);
    t.meta(
        "target",
        if s.period == Period::TwoPi {
            "flux_tube"
        } else {
            "two_anyon"
        },
    );
    let mut partial = Complex64::new(0.0, 0.0);
    for n in sector_order(args.n_max) {
        let k = s.sector(n).map_err(numerical)?;
        partial += s.alpha.sector_weight(n) * k.amplitude;
        t.row(vec![
            n.to_string(),
            num(k.amplitude.re),
            num(k.amplitude.im),
            num(k.error_estimate),
            num(partial.re),
            num(partial.im),
            num(target.amplitude.re),
            num(target.amplitude.im),
            num((partial - target.amplitude).norm() / target.amplitude.norm()),
        ]);
    }
    Ok(t)
}

fn sweep_grid(args: &Args) -> Result<Vec<f64>, CliError> {
    let (a, b, n) = (args.sweep_from.value, args.sweep_to.value, args.sweep_points);
    match n {
        0 => Err(CliError::Usage("the sweep grid is empty (sweep-points = 0)".into())),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn sweep(args: &Args) -> Result<Table, CliError> {
    let grid = sweep_grid(args)?;
    let setups = grid
        .iter()
        .map(|&x| {
            let (mut r, mut th, mut time, mut alpha) = (
                args.r_dst.value,
                args.theta_dst.value,
                args.time.value,
                args.alpha.value,
            );
            match args.sweep {
                SweepParam::Alpha => alpha = x,
                SweepParam::Time => time = x,
                SweepParam::RDst => r = x,
                SweepParam::ThetaDst => th = x,
            }
            Setup::build(args, r, th, time, alpha)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["value", "propagator", "re", "im", "abs", "error_estimate", "terms_used"]);
    for (x, s) in grid.iter().zip(&setups) {
        let rows = [
            (
                "flux_tube",
                flux_tube_k(s.alpha, s.src, s.dst, s.mode, &s.trunc).map_err(numerical)?,
            ),
            (
                "two_anyon",
                two_anyon_k(s.alpha, s.src, s.dst, s.mode, &s.trunc).map_err(numerical)?,
            ),
        ];
        for (name, v) in rows {
            let mut cells = vec![num(*x), name.to_string()];
            cells.extend(value_cells(&v));
            t.row(cells);
        }
    }
    Ok(t)
}

fn euclidean_only(args: &Args, what: &str) -> Result<(), CliError> {
    if args.regime == RegimeArg::Realtime {
        return Err(CliError::Usage(format!(
            "the {what} is Euclidean only; use --regime euclidean"
        )));
    }
    Ok(())
}

/// Slice counts 8, 16, ... up to `top`; `top` itself ends the ladder.
fn lattice_ladder(top: usize) -> Result<Vec<usize>, CliError> {
    if top < 2 {
        return Err(CliError::Usage("lattice-n must be at least 2".into()));
    }
    let mut ladder: Vec<usize> = core::iter::successors(Some(8usize), |n| n.checked_mul(2))
        .take_while(|&n| n < top)
        .collect();
    ladder.push(top);
    Ok(ladder)
}

fn oracle(args: &Args) -> Result<Table, CliError> {
    euclidean_only(args, "lattice oracle")?;
    let s = Setup::from_args(args)?;
    let ladder = lattice_ladder(args.lattice_n)?;
    let ns = [-1i64, 0, 1];
    let labels: Vec<SectorLabel> = ns.iter().map(|&n| SectorLabel::new(n, s.period)).collect();
    let exact = ns
        .iter()
        .map(|&n| s.sector(n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(numerical)?;
    let time = s.mode.time();
    let mut t = Table::new(&[
        "slices",
        "n",
        "lattice",
        "lattice_error",
        "closed_form",
        "rel_deviation",
    ]);
    for &slices in &ladder {
        let mut cfg = LatticeConfig::for_endpoints(&s.src, &s.dst, time, slices);
        cfg.grid_points = args.grid_points;
        let values = transfer_matrix_sectors(&labels, s.src, s.dst, time, &cfg, &s.quad).map_err(numerical)?;
        for ((n, v), k) in ns.iter().zip(&values).zip(&exact) {
            t.row(vec![
                slices.to_string(),
                n.to_string(),
                num(v.amplitude.re),
                num(v.error_estimate),
                num(k.amplitude.re),
                num((v.amplitude.re - k.amplitude.re) / k.amplitude.re),
            ]);
        }
    }
    Ok(t)
}

fn winding(args: &Args) -> Result<Table, CliError> {
    euclidean_only(args, "winding Monte Carlo")?;
    if args.samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let s = Setup::from_args(args)?;
    let cfg = WindingConfig {
        period: s.period,
        ..WindingConfig::default()
    };
    let h = brownian_winding_distribution_with(s.src, s.dst, s.mode.time(), args.samples, args.steps, args.seed, &cfg)
        .map_err(numerical)?;
    let k0 = s.sector(0).map_err(numerical)?.amplitude.re;
    let mut t = Table::new(&[
        "n",
        "count",
        "probability",
        "std_error",
        "mc_ratio",
        "ratio_sigma",
        "sector_ratio",
        "z_score",
        "within_3sigma",
    ]);
    t.meta("result.classified", h.samples);
    t.meta("result.unresolved", h.unresolved);
    t.meta("result.refinements", h.refinements);
    t.meta("result.deepest", h.deepest);
    let n_max = args.n_max as i64;
    for (&n, c) in h.counts.range(-n_max..=n_max) {
        let sector_ratio = s.sector(n).map_err(numerical)?.amplitude.re / k0;
        let (ratio, sigma) = h.ratio_to_zero(n).unwrap_or((0.0, 0.0));
        let (z, pass) = if n == 0 {
            (0.0, "pass")
        } else {
            let z = (ratio - sector_ratio) / sigma;
            (z, if z.abs() <= 3.0 { "pass" } else { "fail" })
        };
        t.row(vec![
            n.to_string(),
            c.count.to_string(),
            num(c.probability),
            num(c.std_error),
            num(ratio),
            num(sigma),
            num(sector_ratio),
            num(z),
            pass.to_string(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_order_alternates() {
        assert_eq!(sector_order(2), vec![0, -1, 1, -2, 2]);
        assert_eq!(sector_order(0), vec![0]);
    }

    #[test]
    fn ladder_doubles_up_to_the_top() {
        assert_eq!(lattice_ladder(64).unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(lattice_ladder(40).unwrap(), vec![8, 16, 32, 40]);
        assert_eq!(lattice_ladder(4).unwrap(), vec![4]);
        assert!(lattice_ladder(1).is_err());
    }
}
