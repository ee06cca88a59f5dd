//! Solutions of the ODE from a phase function.
//!
//! With `u = sin(alpha)/sqrt(alpha')` and `v = cos(alpha)/sqrt(alpha')`, any
//! solution is `c1 u + c2 v`. The pair has Wronskian `u v' - v u' = -1`.

use crate::error::{Error, Result};
use crate::phasefn::PiecewisePhase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionCoeffs {
    /// Coefficient of `sin(alpha)/sqrt(alpha')`.
    pub c1: f64,
    /// Coefficient of `cos(alpha)/sqrt(alpha')`.
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    pub u: f64,
    pub up: f64,
    pub v: f64,
    pub vp: f64,
}

impl Basis {
    pub fn wronskian(&self) -> f64 {
        self.u * self.vp - self.v * self.up
    }
}

pub fn basis_at(phase: &PiecewisePhase, t: f64) -> Result<Basis> {
    let (alpha, ap, app) = phase.eval_all(t)?;
    if !(ap > 0.0) {
        return Err(Error::DegeneratePhase(format!("alpha'({t}) = {ap}")));
    }
    let (s, c) = alpha.sin_cos();
    let sq = ap.sqrt();
    let corr = app / (2.0 * ap * sq);
    Ok(Basis {
        u: s / sq,
        up: c * sq - s * corr,
        v: c / sq,
        vp: -s * sq - c * corr,
    })
}

/// Coefficients of the solution with `y(t0) = y0`, `y'(t0) = yp0`.
pub fn fit_ivp(phase: &PiecewisePhase, t0: f64, y0: f64, yp0: f64) -> Result<SolutionCoeffs> {
    if !y0.is_finite() || !yp0.is_finite() {
        return Err(Error::NumericFailure(format!(
            "non-finite initial data ({y0}, {yp0})"
        )));
    }
    let b = basis_at(phase, t0)?;
    let det = b.wronskian();
    Ok(SolutionCoeffs {
        c1: (y0 * b.vp - b.v * yp0) / det,
        c2: (b.u * yp0 - b.up * y0) / det,
    })
}

/// Coefficients of the solution with `y(a) = ya`, `y(b) = yb` at the ends of
/// the phase's domain.
pub fn fit_bvp(phase: &PiecewisePhase, ya: f64, yb: f64) -> Result<SolutionCoeffs> {
    if !ya.is_finite() || !yb.is_finite() {
        return Err(Error::NumericFailure(format!(
            "non-finite boundary data ({ya}, {yb})"
        )));
    }
    let left = basis_at(phase, phase.a())?;
    let right = basis_at(phase, phase.b())?;
    let det = left.u * right.v - left.v * right.u;
    let scale = left.u.hypot(left.v) * right.u.hypot(right.v);
    if !(det.abs() >= 1e-12 * scale) {
        return Err(Error::IllConditionedBc { det });
    }
    Ok(SolutionCoeffs {
        c1: (ya * right.v - left.v * yb) / det,
        c2: (left.u * yb - right.u * ya) / det,
    })
}

/// `(y, y')` at `t`.
pub fn eval_solution(phase: &PiecewisePhase, coeffs: &SolutionCoeffs, t: f64) -> Result<(f64, f64)> {
    let b = basis_at(phase, t)?;
    Ok((
        coeffs.c1 * b.u + coeffs.c2 * b.v,
        coeffs.c1 * b.up + coeffs.c2 * b.vp,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffexpr::CoefficientSpec;
    use crate::phasefn::{build_phase, SolverConfig};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn constant_phase(w: f64) -> PiecewisePhase {
        build_phase(
            &CoefficientSpec::parse("1").unwrap(),
            w,
            0.0,
            1.0,
            &SolverConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn basis_examples() {
        let p = constant_phase(100.0);
        let b = basis_at(&p, 0.0).unwrap();
        assert_abs_diff_eq!(b.u, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.v, 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(b.up, 10.0, epsilon = 1e-11);
        assert_abs_diff_eq!(b.vp, 0.0, epsilon = 1e-10);

        let b = basis_at(&p, PI / 200.0).unwrap();
        assert_abs_diff_eq!(b.u, 0.1, epsilon = 1e-13);
        assert_abs_diff_eq!(b.v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.up, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.vp, -10.0, epsilon = 1e-10);

        assert!(matches!(basis_at(&p, 2.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn wronskian_is_minus_one() {
        let q = CoefficientSpec::parse("1 + t^2/2 + 0.2*cos(3*t)").unwrap();
        let p = build_phase(&q, 300.0, -1.0, 2.0, &SolverConfig::default()).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for _ in 0..100 {
            let t = rng.gen_range(-1.0..2.0);
            let w = basis_at(&p, t).unwrap().wronskian();
            assert!((w + 1.0).abs() <= 1e-10, "{w}");
        }
    }

    #[test]
    fn ivp_closed_forms() {
        let w: f64 = 100.0;
        let p = constant_phase(w);
        let c = fit_ivp(&p, 0.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(c.c1, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.c2, w.sqrt(), epsilon = 1e-10);
        let s = fit_ivp(&p, 0.0, 0.0, w).unwrap();
        assert_abs_diff_eq!(s.c1, w.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(s.c2, 0.0, epsilon = 1e-10);
        for j in 0..=100 {
            let t = j as f64 / 100.0;
            let (y, yp) = eval_solution(&p, &c, t).unwrap();
            assert_abs_diff_eq!(y, (w * t).cos(), epsilon = 1e-11);
            assert_abs_diff_eq!(yp, -w * (w * t).sin(), epsilon = 1e-8);
        }
        assert!(fit_ivp(&p, 0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn bvp_closed_forms() {
        let w: f64 = 100.0;
        let p = constant_phase(w);
        let c = fit_bvp(&p, 1.0, w.cos()).unwrap();
        assert_abs_diff_eq!(c.c1, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.c2, 10.0, epsilon = 1e-9);
        let z = fit_bvp(&p, 0.0, 0.0).unwrap();
        assert_eq!((z.c1, z.c2), (0.0, 0.0));
        assert_eq!(eval_solution(&p, &z, 0.4).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn bvp_at_conjugate_points_is_ill_conditioned() {
        // sin(w t) vanishes at both ends when w = pi.
        let p = build_phase(
            &CoefficientSpec::parse("1").unwrap(),
            20.0 * PI,
            0.0,
            1.0,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            fit_bvp(&p, 1.0, 1.0),
            Err(Error::IllConditionedBc { .. })
        ));
    }

    #[test]
    fn solution_linear_in_coefficients() {
        let q = CoefficientSpec::parse("2 + sin(t)").unwrap();
        let p = build_phase(&q, 80.0, 0.0, 3.0, &SolverConfig::default()).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        for _ in 0..50 {
            let c = SolutionCoeffs {
                c1: rng.gen_range(-2.0..2.0),
                c2: rng.gen_range(-2.0..2.0),
            };
            let d = SolutionCoeffs {
                c1: rng.gen_range(-2.0..2.0),
                c2: rng.gen_range(-2.0..2.0),
            };
            let lam: f64 = rng.gen_range(0.0..1.0);
            let mix = SolutionCoeffs {
                c1: lam * c.c1 + (1.0 - lam) * d.c1,
                c2: lam * c.c2 + (1.0 - lam) * d.c2,
            };
            let t = rng.gen_range(0.0..3.0);
            let (yc, _) = eval_solution(&p, &c, t).unwrap();
            let (yd, _) = eval_solution(&p, &d, t).unwrap();
            let (ym, _) = eval_solution(&p, &mix, t).unwrap();
            assert!((ym - (lam * yc + (1.0 - lam) * yd)).abs() < 1e-12);
        }
    }
}
