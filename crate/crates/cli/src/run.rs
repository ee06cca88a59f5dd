use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use oscphase::experiments::{self, linspace, powers_of_two, to_csv};
use oscphase::{
    fit_bvp, fit_ivp, io, Catalog, CoefficientSpec, Error, PhaseSolver, PiecewisePhase,
    SolutionCoeffs, SolverConfig,
};

use crate::args::{CatalogName, ExperimentArgs, ExperimentName, SolveArgs, SolverFlags};

/// Machine-readable name for an error raised anywhere in a command.
pub fn error_name(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<Error>() {
        e.name()
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "IoError"
    } else {
        "Error"
    }
}

fn config(flags: &SolverFlags) -> SolverConfig {
    SolverConfig {
        k: flags.k,
        eps: flags.eps,
        thresh: flags.thresh,
        ..SolverConfig::default()
    }
}

fn param(params: &[(String, f64)], key: &str) -> Result<f64> {
    params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidConfig(format!("missing catalog parameter {key}")).into())
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>> {
    raw.iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("parameter {s:?} is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("parameter {s:?} has a non-numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn degree(v: f64) -> Result<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
        Ok(v as u64)
    } else {
        Err(Error::InvalidConfig(format!("degree {v} is not a nonnegative integer")).into())
    }
}

pub fn coefficient(args: &SolveArgs) -> Result<CoefficientSpec> {
    let params = parse_params(&args.params)?;
    match (&args.q, args.catalog) {
        (Some(src), None) => Ok(CoefficientSpec::parse(src)?),
        (None, Some(CatalogName::Legendre)) => {
            Ok(CoefficientSpec::legendre(degree(param(&params, "n")?)?))
        }
        (None, Some(CatalogName::Gegenbauer)) => {
            let n = degree(param(&params, "n")?)?;
            let order = param(&params, "order")?;
            if !(order > -0.5) || order == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "Gegenbauer order {order} must exceed -1/2 and be nonzero"
                ))
                .into());
            }
            Ok(CoefficientSpec::gegenbauer(n, order))
        }
        (None, Some(CatalogName::Bvp)) => Ok(CoefficientSpec::Catalog(Catalog::Bvp)),
        _ => Err(Error::InvalidConfig("give exactly one of --q and --catalog".into()).into()),
    }
}

fn eval_points(args: &SolveArgs) -> Result<Vec<f64>> {
    match &args.eval_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            text.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::InvalidConfig(format!("evaluation point {s:?} is not a number")).into()
                    })
                })
                .collect()
        }
        None => Ok(linspace(args.a, args.b, args.eval_points)),
    }
}

fn fit(phase: &PiecewisePhase, args: &SolveArgs) -> Result<SolutionCoeffs> {
    if let Some(v) = &args.ivp {
        return Ok(fit_ivp(phase, v[0], v[1], v[2])?);
    }
    if let Some(v) = &args.bvp {
        return Ok(fit_bvp(phase, v[0], v[1])?);
    }
    Err(Error::InvalidConfig("give one of --ivp and --bvp".into()).into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let spec = coefficient(args)?;
    let solver = PhaseSolver::new(config(&args.solver))?;
    let phase = solver.build_phase(&spec, args.omega, args.a, args.b)?;
    let coeffs = fit(&phase, args)?;
    let ts = eval_points(args)?;

    let mut csv = String::from("t,y,yp,alpha,alphap\n");
    for t in ts {
        let (y, yp) = oscphase::eval_solution(&phase, &coeffs, t)?;
        let (alpha, alphap, _) = phase.eval_all(t)?;
        csv.push_str(&format!("{t:.16e},{y:.16e},{yp:.16e},{alpha:.16e},{alphap:.16e}\n"));
    }
    if let Some(path) = &args.out_phase {
        io::write_phase(path, &phase).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(args.out_csv.as_deref(), &csv)
}

pub fn experiment(args: &ExperimentArgs) -> Result<()> {
    let config = config(&args.solver);
    let values = match &args.values {
        Some(v) => v.clone(),
        None => {
            let (lo, hi) = args.name.default_exponents();
            let (lo, hi) = (args.min_exp.unwrap_or(lo), args.max_exp.unwrap_or(hi));
            if lo > hi || hi > 62 {
                return Err(Error::InvalidConfig(format!("invalid exponent range {lo}..{hi}")).into());
            }
            powers_of_two(lo, hi)
        }
    };
    let rows = match args.name {
        ExperimentName::LegendreEval => experiments::legendre_eval(&values, args.runs, &config)?,
        ExperimentName::PhaseAccuracy => experiments::phase_accuracy(&values, args.runs, &config)?,
        ExperimentName::Gegenbauer => {
            experiments::gegenbauer(&args.orders, &values, args.runs, &config)?
        }
        ExperimentName::Bvp => experiments::bvp(&values, args.runs, &config)?,
        ExperimentName::FreqSweep => {
            let spec = CoefficientSpec::parse(&args.q)?;
            experiments::freq_sweep(&spec, &values, args.a, args.b, args.runs, &config)?
        }
    };
    emit(args.out.as_deref(), &to_csv(&rows))
}
