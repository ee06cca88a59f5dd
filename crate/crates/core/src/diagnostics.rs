//! Residual and continuity checks for a constructed phase function.

use crate::appell;
use crate::chebyshev::ChebGrid;
use crate::phasefn::{IntervalData, PiecewisePhase};

/// Largest `|(a')^2 - w^2 q - 3/4 (a''/a')^2 + 1/2 a'''/a'| / (w^2 q)` over
/// the interior nodes, with `a'''` by spectral differentiation of `a''`.
pub fn kummer_residual(grid: &ChebGrid, data: &[IntervalData], omega: f64) -> f64 {
    let k = grid.k();
    let w2 = omega * omega;
    let mut worst = 0.0_f64;
    for d in data {
        let Some(s) = d.solution.as_ref() else {
            return f64::INFINITY;
        };
        let (a, b) = (d.interval.a, d.interval.b);
        let appp = grid.differentiate(&s.app, a, b);
        for i in 1..k - 1 {
            let ap = s.ap[i];
            let app = s.app[i];
            let wq = w2 * d.q[i];
            let r = ap * ap - wq - 0.75 * (app / ap).powi(2) + 0.5 * appp[i] / ap;
            worst = worst.max((r / wq).abs());
        }
    }
    worst
}

/// Largest Appell residual over solved intervals with `m = 1/alpha'`, divided
/// by `w^2 max(|q|, |q'|) |m|` on each interval.
pub fn appell_residual(grid: &ChebGrid, data: &[IntervalData], omega: f64) -> f64 {
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    data.iter()
        .map(|d| {
            let Some(s) = d.solution.as_ref() else {
                return f64::INFINITY;
            };
            let (a, b) = (d.interval.a, d.interval.b);
            let m: Vec<f64> = s.ap.iter().map(|v| 1.0 / v).collect();
            let qp = grid.differentiate(&d.q, a, b);
            let scale = omega * omega * sup(&d.q).max(sup(&qp)) * sup(&m);
            appell::appell_residual(grid, a, b, &d.q, omega, &m) / scale
        })
        .fold(0.0, f64::max)
}

/// Largest relative jump of `alpha`, `alpha'`, `alpha''` across interior
/// interval boundaries. Jumps in `alpha''` are scaled by `omega max|alpha'|`.
pub fn continuity_defect(phase: &PiecewisePhase) -> (f64, f64, f64) {
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for pair in phase.intervals.windows(2) {
        let (l, r) = (&pair[0], &pair[1]);
        let t = l.b;
        let ev = |e: &crate::chebyshev::ChebExpansion| e.eval(t).unwrap_or(f64::NAN);
        let (al, ar) = (ev(&l.alpha), ev(&r.alpha));
        let (pl, pr) = (ev(&l.alpha_p), ev(&r.alpha_p));
        let (ql, qr) = (ev(&l.alpha_pp), ev(&r.alpha_pp));
        let pmax = pl.abs().max(pr.abs());
        worst.0 = worst.0.max((al - ar).abs() / al.abs().max(ar.abs()).max(1.0));
        worst.1 = worst.1.max((pl - pr).abs() / pmax);
        worst.2 = worst.2.max((ql - qr).abs() / (phase.omega.max(1.0) * pmax));
    }
    worst
}
