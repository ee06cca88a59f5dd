//! Nonoscillatory phase functions for `y'' + omega^2 q(t, omega) y = 0`.
//!
//! A phase function `alpha` with `alpha' > 0` represents the solutions as
//! `sin(alpha)/sqrt(alpha')` and `cos(alpha)/sqrt(alpha')`. When `alpha` is
//! nonoscillatory it is cheap to represent on a piecewise Chebyshev grid, so
//! solutions can be evaluated anywhere in time nearly independent of `omega`.

pub mod appell;
pub mod chebyshev;
pub mod coeffexpr;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod phasefn;
pub mod reference;
pub mod riccati;
pub mod solve;

pub use chebyshev::{ChebExpansion, ChebGrid};
pub use coeffexpr::{Catalog, CoefficientSpec};
pub use error::{Error, Result};
pub use phasefn::{build_phase, PhaseSolver, PiecewisePhase, Provenance, SolverConfig};
pub use solve::{basis_at, eval_solution, fit_bvp, fit_ivp, Basis, SolutionCoeffs};
