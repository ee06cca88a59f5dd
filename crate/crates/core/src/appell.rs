//! Initial and terminal value problems for Appell's equation
//! `m''' + 4 w^2 q m' + 2 w^2 q' m = 0`, whose positive solutions are the
//! reciprocals `m = 1 / alpha'` of trigonometric phase derivatives.
//!
//! Writing `m` as its quadratic Taylor polynomial at the anchor point `c`
//! plus a triple antiderivative of `sigma = m'''` turns the equation into a
//! second-kind integral equation, which is collocated on the extremal grid
//! and solved densely.

use nalgebra::{DMatrix, DVector};

use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Data given at the left endpoint.
    Left,
    /// Data given at the right endpoint.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppellIvpData {
    pub m0: f64,
    pub mp0: f64,
    pub mpp0: f64,
    pub side: Side,
}

fn check_apval(apval: f64) -> Result<()> {
    if !(apval > 0.0) {
        return Err(Error::DegeneratePhase(format!(
            "phase derivative {apval} is not positive"
        )));
    }
    Ok(())
}

/// `alpha'''` at a point, forced by Kummer's equation from `alpha'`,
/// `alpha''` and `omega^2 q` there.
pub fn alpha_third(apval: f64, appval: f64, qval_scaled: f64) -> Result<f64> {
    check_apval(apval)?;
    let ap2 = apval * apval;
    Ok((4.0 * qval_scaled * ap2 - 4.0 * ap2 * ap2 + 3.0 * appval * appval) / (2.0 * apval))
}

/// `(m, m', m'')` of `m = 1 / alpha'` from `(alpha', alpha'', alpha''')`.
pub fn phase_to_m(apval: f64, appval: f64, apppval: f64) -> Result<(f64, f64, f64)> {
    check_apval(apval)?;
    let ap2 = apval * apval;
    Ok((
        1.0 / apval,
        -appval / ap2,
        2.0 * appval * appval / (ap2 * apval) - apppval / ap2,
    ))
}

/// `alpha' = 1 / m` and `alpha'' = -alpha'^2 m'` at every node.
pub fn m_to_phase(m: &[f64], mp: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(v) = m.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::DegeneratePhase(format!(
            "modulus function value {v} is not positive"
        )));
    }
    let ap: Vec<f64> = m.iter().map(|v| 1.0 / v).collect();
    let app = ap.iter().zip(mp).map(|(a, p)| -a * a * p).collect();
    Ok((ap, app))
}

/// Antiderivative operator on `[a, b]` anchored at the data side.
fn anchored_integral(grid: &ChebGrid, a: f64, b: f64, side: Side) -> DMatrix<f64> {
    let k = grid.k();
    let mut j = grid.integ() * ((b - a) / 2.0);
    if side == Side::Right {
        let last = j.row(k - 1).clone_owned();
        for i in 0..k {
            let mut row = j.row_mut(i);
            row -= &last;
        }
    }
    j
}

fn solve(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    q: &[f64],
    omega: f64,
    data: &AppellIvpData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = grid.k();
    if q.len() != k {
        return Err(Error::InvalidConfig(format!(
            "expected {k} coefficient samples, got {}",
            q.len()
        )));
    }
    if !(data.m0 > 0.0) {
        return Err(Error::DegeneratePhase(format!(
            "initial modulus {} is not positive",
            data.m0
        )));
    }
    let w2 = omega * omega;
    let qp = grid.differentiate(q, a, b);
    let (from_a, to_b) = grid.gaps_on(a, b);
    let tc: Vec<f64> = match data.side {
        Side::Left => from_a,
        Side::Right => to_b.iter().map(|d| -d).collect(),
    };

    let j1 = anchored_integral(grid, a, b, data.side);
    let j2 = &j1 * &j1;
    let j3 = &j2 * &j1;

    let mut mat = DMatrix::identity(k, k);
    for i in 0..k {
        let (s2, s3) = (4.0 * w2 * q[i], 2.0 * w2 * qp[i]);
        for j in 0..k {
            mat[(i, j)] += s2 * j2[(i, j)] + s3 * j3[(i, j)];
        }
    }
    let (m0, mp0, mpp0) = (data.m0, data.mp0, data.mpp0);
    let rhs = DVector::from_fn(k, |i, _| {
        let x = tc[i];
        -4.0 * w2 * q[i] * (mp0 + mpp0 * x) - 2.0 * w2 * qp[i] * (m0 + mp0 * x + 0.5 * mpp0 * x * x)
    });
    let sigma = mat.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let i3 = &j3 * &sigma;
    let i2 = &j2 * &sigma;
    let m: Vec<f64> = (0..k)
        .map(|i| m0 + mp0 * tc[i] + 0.5 * mpp0 * tc[i] * tc[i] + i3[i])
        .collect();
    let mp: Vec<f64> = (0..k).map(|i| mp0 + mpp0 * tc[i] + i2[i]).collect();
    if let Some(v) = m.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::DegeneratePhase(format!(
            "modulus function reached {v} on [{a}, {b}]"
        )));
    }
    Ok((m, mp))
}

/// Initial value problem with data at the left endpoint `a`.
pub fn solve_ivp(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    q: &[f64],
    omega: f64,
    data: &AppellIvpData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if data.side != Side::Left {
        return Err(Error::InvalidConfig(
            "initial value problem needs left-endpoint data".into(),
        ));
    }
    solve(grid, a, b, q, omega, data)
}

/// Terminal value problem with data at the right endpoint `b`.
pub fn solve_tvp(
    grid: &ChebGrid,
    a: f64,
    b: f64,
    q: &[f64],
    omega: f64,
    data: &AppellIvpData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if data.side != Side::Right {
        return Err(Error::InvalidConfig(
            "terminal value problem needs right-endpoint data".into(),
        ));
    }
    solve(grid, a, b, q, omega, data)
}

/// Max-norm of the collocated Appell residual of `m` on `[a, b]`.
pub fn appell_residual(grid: &ChebGrid, a: f64, b: f64, q: &[f64], omega: f64, m: &[f64]) -> f64 {
    let w2 = omega * omega;
    let qp = grid.differentiate(q, a, b);
    let m1 = grid.differentiate(m, a, b);
    let m2 = grid.differentiate(&m1, a, b);
    let m3 = grid.differentiate(&m2, a, b);
    (0..grid.k())
        .map(|i| (m3[i] + 4.0 * w2 * q[i] * m1[i] + 2.0 * w2 * qp[i] * m[i]).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn grid() -> ChebGrid {
        ChebGrid::new(16).unwrap()
    }

    fn left(m0: f64, mp0: f64, mpp0: f64) -> AppellIvpData {
        AppellIvpData {
            m0,
            mp0,
            mpp0,
            side: Side::Left,
        }
    }

    fn right(m0: f64, mp0: f64, mpp0: f64) -> AppellIvpData {
        AppellIvpData {
            m0,
            mp0,
            mpp0,
            side: Side::Right,
        }
    }

    #[test]
    fn alpha_third_examples() {
        let w = 123.0;
        assert_abs_diff_eq!(alpha_third(w, 0.0, w * w).unwrap(), 0.0, epsilon = 1e-6);
        assert_eq!(alpha_third(2.0, 0.0, 4.0).unwrap(), 0.0);
        assert_eq!(alpha_third(1.0, 1.0, 2.0).unwrap(), 3.5);
        assert!(matches!(
            alpha_third(0.0, 1.0, 2.0),
            Err(Error::DegeneratePhase(_))
        ));
    }

    #[test]
    fn phase_to_m_examples() {
        assert_eq!(phase_to_m(50.0, 0.0, 0.0).unwrap(), (0.02, 0.0, 0.0));
        assert_eq!(phase_to_m(1.0, 1.0, 0.0).unwrap(), (1.0, -1.0, 2.0));
        assert_eq!(phase_to_m(2.0, 4.0, 8.0).unwrap(), (0.5, -1.0, 2.0));
        assert!(phase_to_m(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn m_to_phase_examples() {
        let w = 40.0;
        let (ap, app) = m_to_phase(&[1.0 / w], &[0.0]).unwrap();
        assert_abs_diff_eq!(ap[0], w, epsilon = 1e-13);
        assert_eq!(app[0], 0.0);
        assert_eq!(m_to_phase(&[1.0], &[-1.0]).unwrap(), (vec![1.0], vec![1.0]));
        assert_eq!(
            m_to_phase(&[4.0], &[2.0]).unwrap(),
            (vec![0.25], vec![-0.125])
        );
        assert!(m_to_phase(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn point_conversion_round_trip() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let ap: f64 = rng.gen_range(1e-3..1e4);
            let app: f64 = rng.gen_range(-1e3..1e3);
            let appp: f64 = rng.gen_range(-1e5..1e5);
            let (m, mp, _) = phase_to_m(ap, app, appp).unwrap();
            let (ap2, app2) = m_to_phase(&[m], &[mp]).unwrap();
            assert!((ap2[0] - ap).abs() <= 1e-13 * ap);
            assert!((app2[0] - app).abs() <= 1e-13 * app.abs().max(1e-300));
        }
    }

    #[test]
    fn constant_modulus() {
        let g = grid();
        let w = 100.0;
        let (m, mp) = solve_ivp(&g, 0.0, 1.0, &[1.0; 16], w, &left(1.0 / w, 0.0, 0.0)).unwrap();
        for (m, mp) in m.iter().zip(&mp) {
            assert_abs_diff_eq!(*m, 1.0 / w, epsilon = 1e-15);
            assert_abs_diff_eq!(*mp, 0.0, epsilon = 1e-13);
        }
        let (m, _) = solve_tvp(&g, 0.0, 1.0, &[1.0; 16], w, &right(1.0 / w, 0.0, 0.0)).unwrap();
        assert!(m.iter().all(|v| (v - 1.0 / w).abs() < 1e-15));
    }

    #[test]
    fn oscillating_modulus_closed_form() {
        let g = grid();
        let w = 3.0;
        let (a, b) = (0.25, 1.0);
        let ts = g.nodes_on(a, b);
        let (m, mp) = solve_ivp(&g, a, b, &[1.0; 16], w, &left(1.0, 2.0, 0.0)).unwrap();
        for ((t, m), mp) in ts.iter().zip(&m).zip(&mp) {
            let x = 2.0 * w * (t - a);
            assert_abs_diff_eq!(*m, 1.0 + x.sin() / w, epsilon = 1e-12);
            assert_abs_diff_eq!(*mp, 2.0 * x.cos(), epsilon = 1e-11);
        }
        let (m, mp) = solve_tvp(&g, a, b, &[1.0; 16], w, &right(1.0, 2.0, 0.0)).unwrap();
        for ((t, m), mp) in ts.iter().zip(&m).zip(&mp) {
            let x = 2.0 * w * (t - b);
            assert_abs_diff_eq!(*m, 1.0 + x.sin() / w, epsilon = 1e-12);
            assert_abs_diff_eq!(*mp, 2.0 * x.cos(), epsilon = 1e-11);
        }
    }

    #[test]
    fn side_mismatch_rejected() {
        let g = grid();
        assert!(solve_ivp(&g, 0.0, 1.0, &[1.0; 16], 1.0, &right(1.0, 0.0, 0.0)).is_err());
        assert!(solve_tvp(&g, 0.0, 1.0, &[1.0; 16], 1.0, &left(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn nonpositive_modulus_is_degenerate() {
        let g = grid();
        // m = 0.5 + sin(2 w t)/w dips below zero.
        let w = 1.0;
        let out = solve_ivp(&g, 0.0, 3.0, &[1.0; 16], w, &left(0.05, 2.0, 0.0));
        assert!(matches!(out, Err(Error::DegeneratePhase(_))), "{out:?}");
    }

    #[test]
    fn constant_q_span_random_data() {
        // m lies in span{1, sin 2w(t-c), cos 2w(t-c)}.
        let g = grid();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let (a, b) = (0.0, 0.5);
        let ts = g.nodes_on(a, b);
        for _ in 0..50 {
            let w: f64 = rng.gen_range(0.5..4.0);
            let mp0: f64 = rng.gen_range(-1.0..1.0);
            let mpp0: f64 = rng.gen_range(-1.0..1.0);
            let m0 = 2.0 + rng.gen_range(0.0..1.0);
            let data = left(m0, mp0, mpp0);
            // m = A + B sin(2w x) + C cos(2w x), x = t - a
            let cc = -mpp0 / (4.0 * w * w);
            let bb = mp0 / (2.0 * w);
            let aa = m0 - cc;
            let Ok((m, _)) = solve_ivp(&g, a, b, &[1.0; 16], w, &data) else {
                continue;
            };
            for (t, m) in ts.iter().zip(&m) {
                let x = 2.0 * w * (t - a);
                assert_abs_diff_eq!(*m, aa + bb * x.sin() + cc * x.cos(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn forward_backward_round_trip() {
        let g = grid();
        let (a, b) = (0.0, 0.25);
        let w = 4.0;
        let ts = g.nodes_on(a, b);
        let q: Vec<f64> = ts.iter().map(|t| 1.0 + t * t / 2.0).collect();
        let ap0 = w;
        let app0 = 0.0;
        let appp0 = alpha_third(ap0, app0, w * w * q[0]).unwrap();
        let (m0, mp0, mpp0) = phase_to_m(ap0, app0, appp0).unwrap();
        let (m, mp) = solve_ivp(&g, a, b, &q, w, &left(m0, mp0, mpp0)).unwrap();

        let (ap, app) = m_to_phase(&m, &mp).unwrap();
        let apppb = alpha_third(ap[15], app[15], w * w * q[15]).unwrap();
        let (mb, mpb, mppb) = phase_to_m(ap[15], app[15], apppb).unwrap();
        let (m_back, _) = solve_tvp(&g, a, b, &q, w, &right(mb, mpb, mppb)).unwrap();
        for (f, r) in m.iter().zip(&m_back) {
            assert!((f - r).abs() <= 1e-10 * f.abs(), "{f} vs {r}");
        }

        let qmax = q.iter().fold(0.0_f64, |x, v| x.max(*v));
        let qp = g.differentiate(&q, a, b);
        let qpmax = qp.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
        let mmax = m.iter().fold(0.0_f64, |x, v| x.max(*v));
        let res = appell_residual(&g, a, b, &q, w, &m);
        assert!(res <= 1e-8 * w * w * qmax.max(qpmax) * mmax, "residual {res}");
    }
}
