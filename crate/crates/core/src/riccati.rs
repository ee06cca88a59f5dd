//! Newton-Kantorovich solution of the collocated Riccati equation
//! `r' + r^2 + omega^2 q = 0` on one interval.
//!
//! The iteration starts from the Liouville-Green logarithmic derivative and
//! approximates every linearized solve by the second iterate of the
//! fixed-point scheme `h <- -diag(2r)^{-1} (D h + F(r))`, which converges
//! quickly when the interval is in the high-frequency regime.

use num_complex::Complex64;

use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};
use crate::phasefn::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiResult {
    /// Solution samples at the mapped grid nodes.
    pub r: Vec<Complex64>,
    pub iterations: usize,
    pub final_update_norm: f64,
    /// `||h_i||_inf` for every Newton update, in order.
    pub update_norms: Vec<f64>,
}

pub(crate) fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `r_LG = i omega sqrt(q) - q' / (4 q)` at every node.
pub fn lg_samples(q: &[f64], qp: &[f64], omega: f64) -> Result<Vec<Complex64>> {
    q.iter()
        .zip(qp)
        .map(|(&q, &qp)| {
            if !(q > 0.0) {
                return Err(Error::QNotPositive {
                    t: f64::NAN,
                    value: q,
                });
            }
            Ok(Complex64::new(-qp / (4.0 * q), omega * q.sqrt()))
        })
        .collect()
}

/// `F(r) = (2/(b-a)) D r + r o r + omega^2 q`.
pub fn residual(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    r: &[Complex64],
    q: &[f64],
    omega: f64,
) -> Vec<Complex64> {
    let w2 = omega * omega;
    grid.differentiate(r, a, b)
        .into_iter()
        .zip(r.iter().zip(q))
        .map(|(dr, (&r, &q))| dr + r * r + w2 * q)
        .collect()
}

/// Approximate solution of `(diag(2r) + (2/(b-a)) D) h = -F` by the second
/// fixed-point iterate `h = diag(2r)^{-1} ((2/(b-a)) D diag(2r)^{-1} - I) F`.
pub fn linearized_step(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    r: &[Complex64],
    fr: &[Complex64],
) -> Result<Vec<Complex64>> {
    if r.iter().any(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(Error::SingularLinearization);
    }
    let g: Vec<Complex64> = fr.iter().zip(r).map(|(f, r)| f / (2.0 * r)).collect();
    let dg = grid.differentiate(&g, a, b);
    Ok(dg
        .into_iter()
        .zip(g.iter().zip(r))
        .map(|(dg, (g, r))| dg / (2.0 * r) - g)
        .collect())
}

/// Newton-Kantorovich iteration from the Liouville-Green start.
///
/// `q` holds the coefficient at the mapped nodes of `[a, b]`; its derivative
/// is taken spectrally. Stops once `||h|| <= eps ||r_i||`.
pub fn newton_solve(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    q: &[f64],
    omega: f64,
    config: &SolverConfig,
) -> Result<RiccatiResult> {
    let qp = grid.differentiate(q, a, b);
    let r = lg_samples(q, &qp, omega)?;
    newton_from(grid, a, b, q, omega, r, config)
}

/// Newton-Kantorovich iteration from an arbitrary starting vector `r`.
pub fn newton_from(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    q: &[f64],
    omega: f64,
    mut r: Vec<Complex64>,
    config: &SolverConfig,
) -> Result<RiccatiResult> {
    let mut update_norms = Vec::new();
    for iter in 1..=config.max_newton {
        let fr = residual(grid, a, b, &r, q, omega);
        let h = linearized_step(grid, a, b, &r, &fr)?;
        let hnorm = inf_norm(&h);
        let rnorm = inf_norm(&r);
        for (ri, hi) in r.iter_mut().zip(&h) {
            *ri += hi;
        }
        update_norms.push(hnorm);
        if !hnorm.is_finite() {
            break;
        }
        if hnorm <= config.eps * rnorm {
            if let Some(z) = r.iter().find(|z| !(z.im > 0.0)) {
                return Err(Error::DegeneratePhase(format!(
                    "Riccati solution has Im(r) = {} on [{a}, {b}]",
                    z.im
                )));
            }
            return Ok(RiccatiResult {
                r,
                iterations: iter,
                final_update_norm: hnorm,
                update_norms,
            });
        }
    }
    Err(Error::NewtonDivergence {
        iterations: update_norms.len(),
    })
}

/// High-frequency indicator `omega sqrt(q_min) (b - a)`.
pub fn gamma(q_min: f64, omega: f64, a: f64, b: f64) -> f64 {
    omega * q_min.max(0.0).sqrt() * (b - a)
}

pub fn is_high_frequency(gamma: f64, thresh: f64) -> bool {
    gamma > thresh
}
