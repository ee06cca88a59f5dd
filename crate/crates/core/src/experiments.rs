//! Numerical experiments: accuracy against oracles and build timings.

use std::f64::consts::FRAC_2_PI;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;

use crate::coeffexpr::{Catalog, CoefficientSpec};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::phasefn::{PhaseSolver, PiecewisePhase, SolverConfig, Which};
use crate::reference::{self, Conditions, ReferenceSolver};
use crate::solve::{eval_solution, fit_bvp, fit_ivp};

/// Number of equispaced evaluation points used by every experiment.
pub const EVAL_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub experiment: &'static str,
    /// Gegenbauer order, when relevant.
    pub param: Option<f64>,
    pub n_or_omega: u64,
    /// Mean wall time of one build, in seconds.
    pub build_time_sec: f64,
    /// Relative error for Legendre experiments, absolute otherwise.
    pub max_err: f64,
    pub cond_pred: Option<f64>,
    /// Size of the reference values (`max |C_n|` for Gegenbauer).
    pub ref_scale: Option<f64>,
    pub n_intervals: usize,
    pub ref_time_sec: Option<f64>,
    pub ref_intervals: Option<usize>,
}

impl ExperimentRow {
    fn new(experiment: &'static str, n_or_omega: u64) -> Self {
        Self {
            experiment,
            param: None,
            n_or_omega,
            build_time_sec: 0.0,
            max_err: 0.0,
            cond_pred: None,
            ref_scale: None,
            n_intervals: 0,
            ref_time_sec: None,
            ref_intervals: None,
        }
    }

    pub const CSV_HEADER: &'static str = "experiment,param,n_or_omega,build_time_sec,max_err,cond_pred,ref_scale,n_intervals,ref_time_sec,ref_intervals";

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{:.16e},{:.16e},{},{},{},{},{}",
            self.experiment,
            opt(self.param),
            self.n_or_omega,
            self.build_time_sec,
            self.max_err,
            opt(self.cond_pred),
            opt(self.ref_scale),
            self.n_intervals,
            opt(self.ref_time_sec),
            self.ref_intervals.map(|v| v.to_string()).unwrap_or_default(),
        )
        .expect("writing to a String cannot fail");
        s
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(ExperimentRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// `count` equispaced points on `[a, b]`, both ends included.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|j| {
                if j == count - 1 {
                    b
                } else {
                    a + (b - a) * j as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn check_runs(runs: usize) -> Result<()> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be positive".into()));
    }
    Ok(())
}

/// Runs `f` `runs` times and returns the last result with the mean time.
pub fn timed<T>(runs: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    check_runs(runs)?;
    let start = Instant::now();
    let mut out = f()?;
    for _ in 1..runs {
        out = f()?;
    }
    let secs = start.elapsed().as_secs_f64() / runs as f64;
    Ok((out, secs.max(f64::MIN_POSITIVE)))
}

fn build_timed(
    solver: &PhaseSolver,
    spec: &CoefficientSpec,
    omega: f64,
    a: f64,
    b: f64,
    runs: usize,
) -> Result<(PiecewisePhase, f64)> {
    timed(runs, || solver.build_phase(spec, omega, a, b))
}

/// Evaluation of `L_n = P_n + i (2/pi) Q_n` on `[0, 0.9]` via the phase
/// function of the Legendre normal form.
pub fn legendre_eval(ns: &[u64], runs: usize, config: &SolverConfig) -> Result<Vec<ExperimentRow>> {
    let solver = PhaseSolver::new(config.clone())?;
    let (a, b) = (0.0, 0.9);
    let ts = linspace(a, b, EVAL_POINTS);
    ns.iter()
        .map(|&n| {
            let spec = CoefficientSpec::legendre(n);
            let (phase, secs) = build_timed(&solver, &spec, 1.0, a, b, runs)?;
            let f0 = reference::legendre_pq(n, 0.0)?;
            // at t = 0 the factor sqrt(1 - t^2) has value 1 and slope 0
            let cp = fit_ivp(&phase, 0.0, f0.p, f0.dp)?;
            let cq = fit_ivp(&phase, 0.0, FRAC_2_PI * f0.q, FRAC_2_PI * f0.dq)?;
            let mut err = 0.0_f64;
            let mut kappa = 0.0_f64;
            for &t in &ts {
                let w = ((1.0 - t) * (1.0 + t)).sqrt();
                let yp = eval_solution(&phase, &cp, t)?.0 / w;
                let yq = eval_solution(&phase, &cq, t)?.0 / w;
                let f = reference::legendre_pq(n, t)?;
                let exact = Complex64::new(f.p, FRAC_2_PI * f.q);
                err = err.max((Complex64::new(yp, yq) - exact).norm() / exact.norm());
                kappa = kappa.max(reference::legendre_condition(n, t)?);
            }
            Ok(ExperimentRow {
                build_time_sec: secs,
                max_err: err,
                cond_pred: Some(kappa),
                n_intervals: phase.n_intervals(),
                ..ExperimentRow::new("legendre-eval", n)
            })
        })
        .collect()
}

/// Relative error of `alpha'` against the explicit Legendre formula on
/// `[0, 1 - 1e-7]`.
pub fn phase_accuracy(ns: &[u64], runs: usize, config: &SolverConfig) -> Result<Vec<ExperimentRow>> {
    let solver = PhaseSolver::new(config.clone())?;
    let (a, b) = (0.0, 1.0 - 1.0e-7);
    let ts = linspace(a, b, EVAL_POINTS);
    ns.iter()
        .map(|&n| {
            let spec = CoefficientSpec::legendre(n);
            let (phase, secs) = build_timed(&solver, &spec, 1.0, a, b, runs)?;
            let mut err = 0.0_f64;
            for &t in &ts {
                let exact = reference::legendre_alpha_exact(n, t)?;
                let got = phase.eval(t, Which::AlphaP)?;
                err = err.max((got - exact).abs() / exact.abs());
            }
            Ok(ExperimentRow {
                build_time_sec: secs,
                max_err: err,
                n_intervals: phase.n_intervals(),
                ..ExperimentRow::new("phase-accuracy", n)
            })
        })
        .collect()
}

/// Evaluation of `C_n^order` on `[0, 0.999]`; the error is absolute and
/// `ref_scale` holds `max |C_n^order|` over the points.
pub fn gegenbauer(
    orders: &[f64],
    ns: &[u64],
    runs: usize,
    config: &SolverConfig,
) -> Result<Vec<ExperimentRow>> {
    let solver = PhaseSolver::new(config.clone())?;
    let (a, b) = (0.0, 0.999);
    let ts = linspace(a, b, EVAL_POINTS);
    let mut rows = Vec::with_capacity(orders.len() * ns.len());
    for &order in orders {
        for &n in ns {
            let spec = CoefficientSpec::gegenbauer(n, order);
            let (phase, secs) = build_timed(&solver, &spec, 1.0, a, b, runs)?;
            let (c0, cp0) = reference::gegenbauer_at_zero(n, order)?;
            let coeffs = fit_ivp(&phase, 0.0, c0, cp0)?;
            let expo = (2.0 * order + 1.0) / 4.0;
            let mut err = 0.0_f64;
            let mut scale = 0.0_f64;
            for &t in &ts {
                let y = eval_solution(&phase, &coeffs, t)?.0;
                let got = y / ((1.0 - t) * (1.0 + t)).powf(expo);
                let exact = reference::gegenbauer(n, order, t)?;
                err = err.max((got - exact).abs());
                scale = scale.max(exact.abs());
            }
            rows.push(ExperimentRow {
                param: Some(order),
                build_time_sec: secs,
                max_err: err,
                ref_scale: Some(scale),
                n_intervals: phase.n_intervals(),
                ..ExperimentRow::new("gegenbauer", n)
            });
        }
    }
    Ok(rows)
}

/// Boundary value problem `y(-1) = y(1) = 1` for the catalog coefficient,
/// compared with the adaptive Chebyshev reference solver. The phase timing
/// includes fitting the boundary conditions.
pub fn bvp(omegas: &[u64], runs: usize, config: &SolverConfig) -> Result<Vec<ExperimentRow>> {
    let solver = PhaseSolver::new(config.clone())?;
    let refsolver = ReferenceSolver::new(config.k, config.eps)?;
    let spec = CoefficientSpec::Catalog(Catalog::Bvp);
    let (a, b) = (-1.0, 1.0);
    let ts = linspace(a, b, EVAL_POINTS);
    omegas
        .iter()
        .map(|&w| {
            let omega = w as f64;
            let ((phase, coeffs), secs) = timed(runs, || {
                let phase = solver.build_phase(&spec, omega, a, b)?;
                let coeffs = fit_bvp(&phase, 1.0, 1.0)?;
                Ok((phase, coeffs))
            })?;
            let (refsol, ref_secs) = timed(runs, || {
                refsolver.solve(&spec, omega, a, b, Conditions::Bvp { ya: 1.0, yb: 1.0 })
            })?;
            let mut err = 0.0_f64;
            for &t in &ts {
                let got = eval_solution(&phase, &coeffs, t)?.0;
                err = err.max((got - refsol.eval(t)?.0).abs());
            }
            Ok(ExperimentRow {
                build_time_sec: secs,
                max_err: err,
                n_intervals: phase.n_intervals(),
                ref_time_sec: Some(ref_secs),
                ref_intervals: Some(refsol.n_intervals()),
                ..ExperimentRow::new("bvp", w)
            })
        })
        .collect()
}

/// Build time and interval count as `omega` varies; the error column holds
/// the relative Kummer residual at the interior nodes.
pub fn freq_sweep(
    spec: &CoefficientSpec,
    omegas: &[u64],
    a: f64,
    b: f64,
    runs: usize,
    config: &SolverConfig,
) -> Result<Vec<ExperimentRow>> {
    let solver = PhaseSolver::new(config.clone())?;
    omegas
        .iter()
        .map(|&w| {
            let omega = w as f64;
            let (phase, secs) = build_timed(&solver, spec, omega, a, b, runs)?;
            let (_, data) = solver.build_with_samples(spec, omega, a, b)?;
            Ok(ExperimentRow {
                build_time_sec: secs,
                max_err: diagnostics::kummer_residual(solver.grid(), &data, omega),
                n_intervals: phase.n_intervals(),
                ..ExperimentRow::new("freq-sweep", w)
            })
        })
        .collect()
}

/// `2^lo, ..., 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let ts = linspace(0.0, 0.9, 1000);
        assert_eq!(ts.len(), 1000);
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[999], 0.9);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rows_have_positive_time() {
        let rows = phase_accuracy(&[128], 1, &SolverConfig::default()).unwrap();
        assert!(rows[0].build_time_sec > 0.0);
        assert!(rows[0].max_err < 1e-11, "{:?}", rows[0]);
        assert!(timed(0, || Ok(())).is_err());
    }

    #[test]
    fn csv_shape() {
        let rows = legendre_eval(&[64], 1, &SolverConfig::default()).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let cols = ExperimentRow::CSV_HEADER.split(',').count();
        assert_eq!(lines[1].split(',').count(), cols);
        assert!(lines[1].starts_with("legendre-eval,,64,"));
    }

    #[test]
    fn powers() {
        assert_eq!(powers_of_two(6, 8), vec![64, 128, 256]);
    }
}
