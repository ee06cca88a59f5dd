//! Text serialization of piecewise phase functions.
//!
//! ```text
//! OSCPHASE 1
//! <k> <m> <omega>
//! <a_1> <b_1>
//! <k coefficients of alpha>
//! <k coefficients of alpha'>
//! <k coefficients of alpha''>
//! ...
//! ```
//!
//! Reals are written with 17 significant digits, which reproduces every
//! `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::chebyshev::ChebExpansion;
use crate::error::{Error, Result};
use crate::phasefn::{PhaseInterval, PiecewisePhase};

pub const MAGIC: &str = "OSCPHASE";
pub const VERSION: u32 = 1;

fn push_real(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String cannot fail");
}

fn push_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        push_real(out, *v);
    }
    out.push('\n');
}

pub fn phase_to_string(phase: &PiecewisePhase) -> String {
    let mut out = format!("{MAGIC} {VERSION}\n{} {} ", phase.k, phase.n_intervals());
    push_real(&mut out, phase.omega);
    out.push('\n');
    for iv in &phase.intervals {
        push_row(&mut out, &[iv.a, iv.b]);
        push_row(&mut out, &iv.alpha.coefs);
        push_row(&mut out, &iv.alpha_p.coefs);
        push_row(&mut out, &iv.alpha_pp.coefs);
    }
    out
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l))
            }
            None => Err(format_err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn parse_reals(line: usize, text: &str, count: usize) -> Result<Vec<f64>> {
    let vals = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format_err(line, format!("invalid number {tok:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != count {
        return Err(format_err(line, format!("expected {count} values, found {}", vals.len())));
    }
    Ok(vals)
}

pub fn phase_from_str(text: &str) -> Result<PiecewisePhase> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, header) = lines.next_line("header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(format_err(ln, "missing OSCPHASE header"));
    }
    match (parts.next().map(str::parse::<u32>), parts.next()) {
        (Some(Ok(VERSION)), None) => {}
        (Some(Ok(v)), None) => return Err(format_err(ln, format!("unknown version {v}"))),
        _ => return Err(format_err(ln, "malformed header")),
    }

    let (ln, dims) = lines.next_line("dimensions")?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(format_err(ln, "expected k, m and omega"));
    }
    let k: usize = dims[0]
        .parse()
        .map_err(|_| format_err(ln, format!("invalid k {:?}", dims[0])))?;
    let m: usize = dims[1]
        .parse()
        .map_err(|_| format_err(ln, format!("invalid interval count {:?}", dims[1])))?;
    let omega: f64 = dims[2]
        .parse()
        .ok()
        .filter(|w: &f64| *w > 0.0 && w.is_finite())
        .ok_or_else(|| format_err(ln, format!("invalid omega {:?}", dims[2])))?;
    if k < 4 {
        return Err(format_err(ln, format!("k = {k} < 4")));
    }
    if m == 0 {
        return Err(format_err(ln, "no intervals"));
    }

    let mut intervals: Vec<PhaseInterval> = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, ends) = lines.next_line("interval endpoints")?;
        let ends = parse_reals(ln, ends, 2)?;
        let (a, b) = (ends[0], ends[1]);
        if !(b > a) {
            return Err(format_err(ln, format!("empty interval [{a}, {b}]")));
        }
        if let Some(prev) = intervals.last() {
            if prev.b != a {
                return Err(format_err(
                    ln,
                    format!("interval starts at {a} but previous ends at {}", prev.b),
                ));
            }
        }
        let mut exp = || -> Result<ChebExpansion> {
            let (ln, row) = lines.next_line("coefficients")?;
            Ok(ChebExpansion {
                a,
                b,
                coefs: parse_reals(ln, row, k)?,
            })
        };
        let alpha = exp()?;
        let alpha_p = exp()?;
        let alpha_pp = exp()?;
        intervals.push(PhaseInterval {
            a,
            b,
            alpha,
            alpha_p,
            alpha_pp,
            provenance: None,
        });
    }
    for (i, l) in lines.inner {
        if !l.trim().is_empty() {
            return Err(format_err(i + 1, "trailing data"));
        }
    }
    Ok(PiecewisePhase { k, omega, intervals })
}

pub fn write_phase(path: impl AsRef<Path>, phase: &PiecewisePhase) -> std::io::Result<()> {
    std::fs::write(path, phase_to_string(phase))
}

/// Reads a phase file; I/O failures are reported as a format error on line 0.
pub fn read_phase(path: impl AsRef<Path>) -> Result<PiecewisePhase> {
    let text = std::fs::read_to_string(path).map_err(|e| format_err(0, e.to_string()))?;
    phase_from_str(&text)
}
