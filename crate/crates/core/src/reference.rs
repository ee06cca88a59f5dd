//! Independent oracles used to check the phase function solver.
//!
//! * Legendre functions `P_n`, `Q_n` and Gegenbauer polynomials `C_n^a` by
//!   forward three-term recurrence in double precision.
//! * The explicit nonoscillatory phase derivative of the Legendre normal form.
//! * A conventional adaptive Chebyshev collocation marcher for
//!   `y'' + omega^2 q y = 0`, whose cost grows linearly with `omega`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;

use crate::chebyshev::{ChebExpansion, ChebGrid};
use crate::coeffexpr::CoefficientSpec;
use crate::error::{Error, Result};

/// Machine epsilon used in condition-number estimates.
pub const EPS0: f64 = 2.220446049250313e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePq {
    pub p: f64,
    pub q: f64,
    pub dp: f64,
    pub dq: f64,
}

/// `P_n(t)`, `Q_n(t)` and their derivatives for `|t| < 1`.
///
/// The recurrence is carried in double-double arithmetic: near `t = 1`,
/// rounding errors in plain double precision accumulate to around `n eps`.
pub fn legendre_pq(n: u64, t: f64) -> Result<LegendrePq> {
    if !(t.abs() < 1.0) {
        return Err(Error::OutOfDomain { t, a: -1.0, b: 1.0 });
    }
    let s = (1.0 - t) * (1.0 + t);
    let q0 = t.atanh();
    if n == 0 {
        return Ok(LegendrePq {
            p: 1.0,
            q: q0,
            dp: 0.0,
            dq: 1.0 / s,
        });
    }
    let tt = TwoFloat::from(t);
    let (mut p0, mut p1) = (TwoFloat::from(1.0), tt);
    let (mut q0, mut q1) = (TwoFloat::from(q0), tt * q0 - 1.0);
    for k in 1..n {
        let kf = k as f64;
        let c = (2.0 * kf + 1.0) * tt;
        let p2 = (c * p1 - p0 * kf) / (kf + 1.0);
        let q2 = (c * q1 - q0 * kf) / (kf + 1.0);
        (p0, p1) = (p1, p2);
        (q0, q1) = (q1, q2);
    }
    let nf = n as f64;
    // (1 - t^2) f_n' = n (f_{n-1} - t f_n)
    Ok(LegendrePq {
        p: p1.hi(),
        q: q1.hi(),
        dp: nf * f64::from(p0 - tt * p1) / s,
        dq: nf * f64::from(q0 - tt * q1) / s,
    })
}

/// `alpha'(t) = 1 / ((1 - t^2) ((pi/2) P_n^2 + (2/pi) Q_n^2))`.
pub fn legendre_alpha_exact(n: u64, t: f64) -> Result<f64> {
    let f = legendre_pq(n, t)?;
    Ok(1.0 / ((1.0 - t) * (1.0 + t) * (FRAC_PI_2 * f.p * f.p + FRAC_2_PI * f.q * f.q)))
}

/// `eps0 |t L_n'(t) / L_n(t)|` for `L_n = P_n + i (2/pi) Q_n`.
pub fn legendre_condition(n: u64, t: f64) -> Result<f64> {
    let f = legendre_pq(n, t)?;
    let l = f.p.hypot(FRAC_2_PI * f.q);
    let dl = f.dp.hypot(FRAC_2_PI * f.dq);
    Ok(EPS0 * (t * dl / l).abs())
}

fn check_order(order: f64) -> Result<()> {
    if !(order > -0.5) || order == 0.0 || !order.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "Gegenbauer order {order} must exceed -1/2 and be nonzero"
        )));
    }
    Ok(())
}

/// `C_n^order(t)` by the three-term recurrence.
pub fn gegenbauer(n: u64, order: f64, t: f64) -> Result<f64> {
    check_order(order)?;
    if !(t.abs() <= 1.0) {
        return Err(Error::OutOfDomain { t, a: -1.0, b: 1.0 });
    }
    let (mut c0, mut c1) = (1.0, 2.0 * order * t);
    if n == 0 {
        return Ok(c0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * (kf + order - 1.0) * t * c1 - (kf + 2.0 * order - 2.0) * c0) / kf;
        (c0, c1) = (c1, c2);
    }
    Ok(c1)
}

/// `(C_n^order(0), d/dt C_n^order(0))` in closed form.
pub fn gegenbauer_at_zero(n: u64, order: f64) -> Result<(f64, f64)> {
    check_order(order)?;
    // C_{2j}^b(0) = prod_{i=1..j} -(i - 1 + b) / i
    let even = |j: u64, b: f64| (1..=j).fold(1.0, |acc, i| -acc * (i as f64 - 1.0 + b) / i as f64);
    if n % 2 == 0 {
        Ok((even(n / 2, order), 0.0))
    } else {
        // d/dt C_n^b = 2 b C_{n-1}^{b+1}
        Ok((0.0, 2.0 * order * even((n - 1) / 2, order + 1.0)))
    }
}

/// Side conditions for the reference solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditions {
    Ivp { t0: f64, y0: f64, yp0: f64 },
    Bvp { ya: f64, yb: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePiece {
    pub y: ChebExpansion,
    pub yp: ChebExpansion,
}

/// Piecewise Chebyshev representation of a solution and its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub pieces: Vec<ReferencePiece>,
}

impl ReferenceSolution {
    pub fn n_intervals(&self) -> usize {
        self.pieces.len()
    }

    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let (a, b) = (self.pieces[0].y.a, self.pieces[self.pieces.len() - 1].y.b);
        if !(t >= a && t <= b) {
            return Err(Error::OutOfDomain { t, a, b });
        }
        let idx = self
            .pieces
            .partition_point(|p| p.y.b < t)
            .min(self.pieces.len() - 1);
        let p = &self.pieces[idx];
        Ok((p.y.eval(t)?, p.yp.eval(t)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

/// One accepted interval of a march: node values for each carried solution.
struct Step {
    a: f64,
    b: f64,
    y: Vec<Vec<f64>>,
    yp: Vec<Vec<f64>>,
}

/// Adaptive Chebyshev collocation solver applied to the oscillatory equation
/// itself.
#[derive(Debug, Clone)]
pub struct ReferenceSolver {
    grid: ChebGrid,
    tol: f64,
    max_depth: usize,
}

impl ReferenceSolver {
    pub fn new(k: usize, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidConfig(format!("tolerance {tol} not in (0, 1)")));
        }
        Ok(Self {
            grid: ChebGrid::new(k)?,
            tol,
            max_depth: 60,
        })
    }

    /// Solve `y'' + w^2 q y = 0` on `[a, b]` for each initial pair `data` given
    /// at the anchor point, integrating the integral form
    /// `y = y0 + yp0 (t - c) + J^2 sigma`.
    fn local_solve(
        &self,
        a: f64,
        b: f64,
        q: &[f64],
        omega: f64,
        dir: Direction,
        data: &[(f64, f64)],
    ) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let k = self.grid.k();
        let w2 = omega * omega;
        let mut j1 = self.grid.integ() * ((b - a) / 2.0);
        let (from_a, to_b) = self.grid.gaps_on(a, b);
        let tc: Vec<f64> = match dir {
            Direction::Forward => from_a,
            Direction::Backward => {
                let last = j1.row(k - 1).clone_owned();
                for i in 0..k {
                    let mut row = j1.row_mut(i);
                    row -= &last;
                }
                to_b.iter().map(|d| -d).collect()
            }
        };
        let j2 = &j1 * &j1;
        let mut mat = DMatrix::identity(k, k);
        for i in 0..k {
            for j in 0..k {
                mat[(i, j)] += w2 * q[i] * j2[(i, j)];
            }
        }
        let lu = mat.lu();
        let mut ys = Vec::with_capacity(data.len());
        let mut yps = Vec::with_capacity(data.len());
        for &(y0, yp0) in data {
            let rhs = DVector::from_fn(k, |i, _| -w2 * q[i] * (y0 + yp0 * tc[i]));
            let sigma = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
            let i1 = &j1 * &sigma;
            let i2 = &j2 * &sigma;
            ys.push((0..k).map(|i| y0 + yp0 * tc[i] + i2[i]).collect());
            yps.push((0..k).map(|i| yp0 + i1[i]).collect());
        }
        Ok((ys, yps))
    }

    /// March from `from` towards `to`, carrying every initial pair in `data`.
    fn march(
        &self,
        spec: &CoefficientSpec,
        omega: f64,
        from: f64,
        to: f64,
        data: &[(f64, f64)],
    ) -> Result<Vec<Step>> {
        let k = self.grid.k();
        let dir = if to > from {
            Direction::Forward
        } else {
            Direction::Backward
        };
        let mut state: Vec<(f64, f64)> = data.to_vec();
        let mut steps = Vec::new();
        // pending intervals ordered so that the one adjacent to the current
        // point is on top
        let mut todo = vec![(from.min(to), from.max(to), 0usize)];
        while let Some((a, b, depth)) = todo.pop() {
            let q = spec.sample_on(&self.grid, a, b, omega)?;
            let (ys, yps) = self.local_solve(a, b, &q, omega, dir, &state)?;
            let fits = ys.iter().all(|y| self.grid.fit_ratio(y) < self.tol);
            if fits {
                let end = match dir {
                    Direction::Forward => k - 1,
                    Direction::Backward => 0,
                };
                state = ys.iter().zip(&yps).map(|(y, yp)| (y[end], yp[end])).collect();
                steps.push(Step { a, b, y: ys, yp: yps });
            } else {
                if depth >= self.max_depth {
                    return Err(Error::NonConvergentRefinement { a, b });
                }
                let mid = 0.5 * (a + b);
                match dir {
                    Direction::Forward => {
                        todo.push((mid, b, depth + 1));
                        todo.push((a, mid, depth + 1));
                    }
                    Direction::Backward => {
                        todo.push((a, mid, depth + 1));
                        todo.push((mid, b, depth + 1));
                    }
                }
            }
        }
        if dir == Direction::Backward {
            steps.reverse();
        }
        Ok(steps)
    }

    fn pieces(&self, steps: &[Step], weights: &[f64]) -> Result<Vec<ReferencePiece>> {
        steps
            .iter()
            .map(|s| {
                let combine = |v: &[Vec<f64>]| -> Vec<f64> {
                    (0..self.grid.k())
                        .map(|i| weights.iter().zip(v).map(|(w, col)| w * col[i]).sum())
                        .collect()
                };
                Ok(ReferencePiece {
                    y: self.grid.vals_to_coefs(&combine(&s.y), s.a, s.b)?,
                    yp: self.grid.vals_to_coefs(&combine(&s.yp), s.a, s.b)?,
                })
            })
            .collect()
    }

    pub fn solve(
        &self,
        spec: &CoefficientSpec,
        omega: f64,
        a: f64,
        b: f64,
        conditions: Conditions,
    ) -> Result<ReferenceSolution> {
        if !(b > a) {
            return Err(Error::InvalidConfig(format!("invalid domain [{a}, {b}]")));
        }
        match conditions {
            Conditions::Ivp { t0, y0, yp0 } => {
                if !(t0 >= a && t0 <= b) {
                    return Err(Error::OutOfDomain { t: t0, a, b });
                }
                let mut pieces = Vec::new();
                if t0 > a {
                    let back = self.march(spec, omega, t0, a, &[(y0, yp0)])?;
                    pieces.extend(self.pieces(&back, &[1.0])?);
                }
                if t0 < b {
                    let fwd = self.march(spec, omega, t0, b, &[(y0, yp0)])?;
                    pieces.extend(self.pieces(&fwd, &[1.0])?);
                }
                Ok(ReferenceSolution { pieces })
            }
            Conditions::Bvp { ya, yb } => {
                let steps = self.march(spec, omega, a, b, &[(1.0, 0.0), (0.0, 1.0)])?;
                let last = steps.last().expect("march produces at least one step");
                let k = self.grid.k();
                let (y1b, y2b) = (last.y[0][k - 1], last.y[1][k - 1]);
                let y2max = steps
                    .iter()
                    .flat_map(|s| s.y[1].iter())
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                if !(y2b.abs() >= 1e-12 * y2max) {
                    return Err(Error::IllConditionedBc { det: y2b });
                }
                let c2 = (yb - ya * y1b) / y2b;
                Ok(ReferenceSolution {
                    pieces: self.pieces(&steps, &[ya, c2])?,
                })
            }
        }
    }
}

/// Reference solve with a 16-point grid and fit tolerance `tol`.
pub fn spectral_reference_solve(
    spec: &CoefficientSpec,
    omega: f64,
    a: f64,
    b: f64,
    conditions: Conditions,
    tol: f64,
) -> Result<ReferenceSolution> {
    ReferenceSolver::new(16, tol)?.solve(spec, omega, a, b, conditions)
}
