//! Construction of a nonoscillatory trigonometric phase function on `[a, b]`.
//!
//! The build runs in four stages:
//!
//! 1. adaptively bisect `[a, b]` until `q` is resolved on every interval;
//! 2. sweep left to right, solving the Riccati equation on high-frequency
//!    intervals and extending the phase derivative into low-frequency ones by
//!    initial value problems for Appell's equation;
//! 3. sweep right to left, filling whatever is still unsolved by terminal
//!    value problems for Appell's equation;
//! 4. integrate `alpha'` spectrally, normalized so that `alpha(a) = 0`.
//!
//! Stages 2 and 3 bisect any interval on which `alpha'` is not resolved to
//! the requested precision.

use std::collections::VecDeque;

use crate::appell::{self, AppellIvpData, Side};
use crate::chebyshev::{ChebExpansion, ChebGrid};
use crate::coeffexpr::CoefficientSpec;
use crate::error::{Error, Result};
use crate::riccati;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Chebyshev grid size.
    pub k: usize,
    /// Target precision for the goodness-of-fit test and Newton stopping.
    pub eps: f64,
    /// High-frequency threshold on `omega sqrt(q_min) (b - a)`.
    pub thresh: f64,
    pub max_newton: usize,
    /// Maximum number of halvings of the initial interval.
    pub max_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 16,
            eps: 1.0e-12,
            thresh: 10.0,
            max_newton: 20,
            max_depth: 60,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 4 {
            return Err(Error::InvalidConfig(format!("k = {} < 4", self.k)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!("eps = {} not in (0, 1)", self.eps)));
        }
        if !(self.thresh > 0.0) {
            return Err(Error::InvalidConfig(format!("thresh = {} <= 0", self.thresh)));
        }
        if self.max_newton == 0 {
            return Err(Error::InvalidConfig("max_newton must be positive".into()));
        }
        Ok(())
    }
}

/// How the phase derivative on an interval was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Riccati,
    AppellIvp,
    AppellTvp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Alpha,
    AlphaP,
    AlphaPP,
}

/// A discretization interval together with its halving depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub depth: usize,
}

impl Interval {
    fn split(&self, max_depth: usize) -> Result<(Interval, Interval)> {
        if self.depth >= max_depth {
            return Err(Error::NonConvergentRefinement {
                a: self.a,
                b: self.b,
            });
        }
        let mid = 0.5 * (self.a + self.b);
        if !(mid > self.a && mid < self.b) {
            return Err(Error::NonConvergentRefinement {
                a: self.a,
                b: self.b,
            });
        }
        let depth = self.depth + 1;
        Ok((
            Interval {
                a: self.a,
                b: mid,
                depth,
            },
            Interval {
                a: mid,
                b: self.b,
                depth,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSamples {
    /// `alpha'` at the mapped nodes.
    pub ap: Vec<f64>,
    /// `alpha''` at the mapped nodes.
    pub app: Vec<f64>,
    pub provenance: Provenance,
}

/// Interval state between the sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalData {
    pub interval: Interval,
    /// `q` at the mapped nodes (without the `omega^2` factor).
    pub q: Vec<f64>,
    pub solution: Option<PhaseSamples>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInterval {
    pub a: f64,
    pub b: f64,
    pub alpha: ChebExpansion,
    pub alpha_p: ChebExpansion,
    pub alpha_pp: ChebExpansion,
    /// `None` for phases read back from a file.
    pub provenance: Option<Provenance>,
}

/// Piecewise Chebyshev representation of `alpha`, `alpha'` and `alpha''`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePhase {
    pub k: usize,
    pub omega: f64,
    pub intervals: Vec<PhaseInterval>,
}

impl PiecewisePhase {
    pub fn a(&self) -> f64 {
        self.intervals[0].a
    }

    pub fn b(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].b
    }

    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }

    /// Index of the interval containing `t`; shared endpoints go left.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= self.a() && t <= self.b()) {
            return Err(Error::OutOfDomain {
                t,
                a: self.a(),
                b: self.b(),
            });
        }
        let idx = self.intervals.partition_point(|iv| iv.b < t);
        Ok(idx.min(self.intervals.len() - 1))
    }

    pub fn eval(&self, t: f64, which: Which) -> Result<f64> {
        let iv = &self.intervals[self.locate(t)?];
        match which {
            Which::Alpha => iv.alpha.eval(t),
            Which::AlphaP => iv.alpha_p.eval(t),
            Which::AlphaPP => iv.alpha_pp.eval(t),
        }
    }

    /// `(alpha, alpha', alpha'')` at `t`.
    pub fn eval_all(&self, t: f64) -> Result<(f64, f64, f64)> {
        let iv = &self.intervals[self.locate(t)?];
        Ok((iv.alpha.eval(t)?, iv.alpha_p.eval(t)?, iv.alpha_pp.eval(t)?))
    }
}

pub fn eval_phase(phase: &PiecewisePhase, t: f64, which: Which) -> Result<f64> {
    phase.eval(t, which)
}

/// Owns the grid for a configuration and runs the stages.
#[derive(Debug, Clone)]
pub struct PhaseSolver {
    grid: ChebGrid,
    config: SolverConfig,
}

impl PhaseSolver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            grid: ChebGrid::new(config.k)?,
            config,
        })
    }

    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn sample(&self, spec: &CoefficientSpec, iv: &Interval, omega: f64) -> Result<Vec<f64>> {
        spec.sample_on(&self.grid, iv.a, iv.b, omega)
    }

    fn sample_positive(
        &self,
        spec: &CoefficientSpec,
        iv: &Interval,
        omega: f64,
    ) -> Result<Vec<f64>> {
        let ts = self.grid.nodes_on(iv.a, iv.b);
        let q = spec.sample_on(&self.grid, iv.a, iv.b, omega)?;
        if let Some((t, v)) = ts.iter().zip(&q).find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::QNotPositive { t: *t, value: *v });
        }
        Ok(q)
    }

    /// Stage one: bisect until `q` passes the goodness-of-fit test.
    pub fn discretize_coefficient(
        &self,
        spec: &CoefficientSpec,
        omega: f64,
        a: f64,
        b: f64,
    ) -> Result<Vec<Interval>> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig(format!("invalid domain [{a}, {b}]")));
        }
        let mut todo = vec![Interval { a, b, depth: 0 }];
        let mut out = Vec::new();
        while let Some(iv) = todo.pop() {
            let q = self.sample(spec, &iv, omega)?;
            if self.grid.fit_ratio(&q) < self.config.eps {
                let ts = self.grid.nodes_on(iv.a, iv.b);
                if let Some((t, v)) = ts.iter().zip(&q).find(|(_, v)| !(**v > 0.0)) {
                    return Err(Error::QNotPositive { t: *t, value: *v });
                }
                out.push(iv);
            } else {
                let (l, r) = iv.split(self.config.max_depth)?;
                todo.push(r);
                todo.push(l);
            }
        }
        out.sort_by(|x, y| x.a.total_cmp(&y.a));
        Ok(out)
    }

    fn riccati_samples(&self, iv: &Interval, q: &[f64], omega: f64) -> Result<PhaseSamples> {
        let res = riccati::newton_solve(&self.grid, iv.a, iv.b, q, omega, &self.config)?;
        let ap: Vec<f64> = res.r.iter().map(|z| z.im).collect();
        let app = res.r.iter().map(|z| -2.0 * z.im * z.re).collect();
        Ok(PhaseSamples {
            ap,
            app,
            provenance: Provenance::Riccati,
        })
    }

    /// Continue `alpha'` across `c` by an Appell solve anchored on `side`.
    fn appell_samples(
        &self,
        iv: &Interval,
        q: &[f64],
        omega: f64,
        apval: f64,
        appval: f64,
        side: Side,
    ) -> Result<PhaseSamples> {
        let k = self.grid.k();
        let qc = match side {
            Side::Left => q[0],
            Side::Right => q[k - 1],
        };
        let apppval = appell::alpha_third(apval, appval, omega * omega * qc)?;
        let (m0, mp0, mpp0) = appell::phase_to_m(apval, appval, apppval)?;
        let data = AppellIvpData {
            m0,
            mp0,
            mpp0,
            side,
        };
        let (m, mp) = match side {
            Side::Left => appell::solve_ivp(&self.grid, iv.a, iv.b, q, omega, &data)?,
            Side::Right => appell::solve_tvp(&self.grid, iv.a, iv.b, q, omega, &data)?,
        };
        let (ap, app) = appell::m_to_phase(&m, &mp)?;
        Ok(PhaseSamples {
            ap,
            app,
            provenance: match side {
                Side::Left => Provenance::AppellIvp,
                Side::Right => Provenance::AppellTvp,
            },
        })
    }

    fn well_fit(&self, s: &PhaseSamples) -> bool {
        self.grid.fit_ratio(&s.ap) < self.config.eps
    }

    /// Stage two: left-to-right sweep.
    pub fn sweep_left_right(
        &self,
        intervals: Vec<Interval>,
        spec: &CoefficientSpec,
        omega: f64,
    ) -> Result<Vec<IntervalData>> {
        let k = self.grid.k();
        let mut todo: VecDeque<Interval> = intervals.into();
        let mut out: Vec<IntervalData> = Vec::with_capacity(todo.len());
        while let Some(iv) = todo.pop_front() {
            let q = self.sample_positive(spec, &iv, omega)?;
            let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
            let gam = riccati::gamma(qmin, omega, iv.a, iv.b);
            let attempt = if riccati::is_high_frequency(gam, self.config.thresh) {
                Some(self.riccati_samples(&iv, &q, omega))
            } else {
                let left = out
                    .last()
                    .filter(|prev| prev.interval.b == iv.a)
                    .and_then(|prev| prev.solution.as_ref());
                left.map(|s| {
                    self.appell_samples(&iv, &q, omega, s.ap[k - 1], s.app[k - 1], Side::Left)
                })
            };
            match attempt {
                None => out.push(IntervalData {
                    interval: iv,
                    q,
                    solution: None,
                }),
                Some(Ok(s)) if self.well_fit(&s) => out.push(IntervalData {
                    interval: iv,
                    q,
                    solution: Some(s),
                }),
                Some(Ok(_))
                | Some(Err(Error::DegeneratePhase(_)))
                | Some(Err(Error::NewtonDivergence { .. })) => {
                    let (l, r) = iv.split(self.config.max_depth)?;
                    todo.push_front(r);
                    todo.push_front(l);
                }
                Some(Err(e)) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Stage three: right-to-left sweep over the intervals left unsolved.
    pub fn sweep_right_left(
        &self,
        partial: Vec<IntervalData>,
        spec: &CoefficientSpec,
        omega: f64,
    ) -> Result<Vec<IntervalData>> {
        if !partial.iter().any(|d| d.solution.is_some()) {
            return Err(Error::NoHighFrequencyInterval);
        }
        let mut todo = partial;
        let mut done: VecDeque<IntervalData> = VecDeque::with_capacity(todo.len());
        while let Some(mut data) = todo.pop() {
            if data.solution.is_some() {
                done.push_front(data);
                continue;
            }
            let iv = data.interval;
            let right = done
                .front()
                .filter(|next| next.interval.a == iv.b)
                .and_then(|next| next.solution.as_ref())
                .ok_or(Error::NoHighFrequencyInterval)?;
            let attempt = self.appell_samples(&iv, &data.q, omega, right.ap[0], right.app[0], Side::Right);
            match attempt {
                Ok(s) if self.well_fit(&s) => {
                    data.solution = Some(s);
                    done.push_front(data);
                }
                Ok(_) | Err(Error::DegeneratePhase(_)) => {
                    let (l, r) = iv.split(self.config.max_depth)?;
                    for half in [l, r] {
                        let q = self.sample_positive(spec, &half, omega)?;
                        todo.push(IntervalData {
                            interval: half,
                            q,
                            solution: None,
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(done.into())
    }

    /// Stage four: spectral integration of `alpha'` with `alpha(a) = 0`.
    pub fn integrate_phase(&self, data: &[IntervalData], omega: f64) -> Result<PiecewisePhase> {
        let k = self.grid.k();
        let mut aval = 0.0;
        let mut intervals = Vec::with_capacity(data.len());
        for d in data {
            let s = d.solution.as_ref().ok_or(Error::NoHighFrequencyInterval)?;
            let Interval { a, b, .. } = d.interval;
            let alpha: Vec<f64> = self
                .grid
                .integrate(&s.ap, a, b)
                .into_iter()
                .map(|v| aval + v)
                .collect();
            aval = alpha[k - 1];
            intervals.push(PhaseInterval {
                a,
                b,
                alpha: self.grid.vals_to_coefs(&alpha, a, b)?,
                alpha_p: self.grid.vals_to_coefs(&s.ap, a, b)?,
                alpha_pp: self.grid.vals_to_coefs(&s.app, a, b)?,
                provenance: Some(s.provenance),
            });
        }
        if intervals.is_empty() {
            return Err(Error::NoHighFrequencyInterval);
        }
        Ok(PiecewisePhase { k, omega, intervals })
    }

    /// All four stages, returning the phase together with the node samples
    /// of the final intervals.
    pub fn build_with_samples(
        &self,
        spec: &CoefficientSpec,
        omega: f64,
        a: f64,
        b: f64,
    ) -> Result<(PiecewisePhase, Vec<IntervalData>)> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidConfig(format!("omega = {omega} must be positive")));
        }
        let initial = self.discretize_coefficient(spec, omega, a, b)?;
        let partial = self.sweep_left_right(initial, spec, omega)?;
        let data = self.sweep_right_left(partial, spec, omega)?;
        let phase = self.integrate_phase(&data, omega)?;
        Ok((phase, data))
    }

    pub fn build_phase(
        &self,
        spec: &CoefficientSpec,
        omega: f64,
        a: f64,
        b: f64,
    ) -> Result<PiecewisePhase> {
        self.build_with_samples(spec, omega, a, b).map(|(p, _)| p)
    }
}

/// Builds a phase function for `y'' + omega^2 q(t, omega) y = 0` on `[a, b]`.
pub fn build_phase(
    spec: &CoefficientSpec,
    omega: f64,
    a: f64,
    b: f64,
    config: &SolverConfig,
) -> Result<PiecewisePhase> {
    PhaseSolver::new(config.clone())?.build_phase(spec, omega, a, b)
}
