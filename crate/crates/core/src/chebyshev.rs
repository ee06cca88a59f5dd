//! Chebyshev extremal grids and the spectral operators built on them.
//!
//! A [`ChebGrid`] holds the nodes of the `k`-point extremal grid on `[-1, 1]`
//! (in ascending order) together with three `k x k` matrices:
//!
//! * `diff` maps values of a polynomial of degree `< k` at the nodes to the
//!   values of its derivative,
//! * `integ` maps those values to the values of the antiderivative that
//!   vanishes at `-1`,
//! * `vals2coefs` maps them to the coefficients `a_0, ..., a_{k-1}` of the
//!   Chebyshev expansion `sum a_j T_j`.
//!
//! The matrices only depend on `k`. On an interval `[a, b]` differentiation
//! picks up a factor `2 / (b - a)` and integration a factor `(b - a) / 2`.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Nodes `cos(pi (k - i) / (k - 1))`, `i = 1..k`, in ascending order.
///
/// Computed through the sine form so the grid is exactly symmetric about 0.
pub fn chebyshev_nodes(k: usize) -> Vec<f64> {
    assert!(k >= 2, "a Chebyshev extremal grid needs at least two nodes");
    let n = (k - 1) as f64;
    (0..k)
        .map(|i| (PI * (2.0 * i as f64 - n) / (2.0 * n)).sin())
        .collect()
}

/// `T_j(x_i)` where `x_i` is the i-th ascending extremal node, with the
/// angle reduced modulo `2 pi` in integer arithmetic.
fn cheb_at_node(j: usize, i: usize, k: usize) -> f64 {
    let n = k - 1;
    let m = (j * (n - i)) % (2 * n);
    (PI * m as f64 / n as f64).cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrid {
    k: usize,
    nodes: Vec<f64>,
    diff: DMatrix<f64>,
    integ: DMatrix<f64>,
    vals2coefs: DMatrix<f64>,
    /// `(1 + x_i) / 2 = sin^2(pi i / (2 (k - 1)))`.
    offsets: Vec<f64>,
}

impl ChebGrid {
    pub fn new(k: usize) -> Result<Self> {
        if k < 4 {
            return Err(Error::InvalidConfig(format!(
                "Chebyshev grid size must be at least 4, got {k}"
            )));
        }
        let nodes = chebyshev_nodes(k);
        let vals2coefs = vals2coefs_matrix(k);
        let diff = diff_matrix(k, &nodes);
        let integ = integ_matrix(k, &vals2coefs);
        let n = (k - 1) as f64;
        let offsets = (0..k)
            .map(|i| (PI * i as f64 / (2.0 * n)).sin().powi(2))
            .collect();
        Ok(Self {
            k,
            nodes,
            diff,
            integ,
            vals2coefs,
            offsets,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn diff(&self) -> &DMatrix<f64> {
        &self.diff
    }

    pub fn integ(&self) -> &DMatrix<f64> {
        &self.integ
    }

    pub fn vals2coefs(&self) -> &DMatrix<f64> {
        &self.vals2coefs
    }

    /// Grid nodes mapped affinely onto `[a, b]`. The endpoints are exact.
    pub fn nodes_on(&self, a: f64, b: f64) -> Vec<f64> {
        let (from_a, to_b) = self.gaps_on(a, b);
        (0..self.k)
            .map(|i| {
                if 2 * i < self.k {
                    a + from_a[i]
                } else {
                    b - to_b[i]
                }
            })
            .collect()
    }

    /// Distances `t_i - a` and `b - t_i` of the mapped nodes, each accurate
    /// to a few ulps.
    pub fn gaps_on(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = b - a;
        let n = self.k - 1;
        let from_a = (0..self.k).map(|i| h * self.offsets[i]).collect();
        let to_b = (0..self.k).map(|i| h * self.offsets[n - i]).collect();
        (from_a, to_b)
    }

    /// Spectral derivative of `vals` sampled on `[a, b]`.
    pub fn differentiate<T>(&self, vals: &[T], a: f64, b: f64) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let scale = 2.0 / (b - a);
        matvec(&self.diff, vals).into_iter().map(|v| v * scale).collect()
    }

    /// Spectral antiderivative of `vals` on `[a, b]`, vanishing at `a`.
    pub fn integrate<T>(&self, vals: &[T], a: f64, b: f64) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let scale = (b - a) / 2.0;
        matvec(&self.integ, vals).into_iter().map(|v| v * scale).collect()
    }

    pub fn coefs(&self, vals: &[f64]) -> Vec<f64> {
        matvec(&self.vals2coefs, vals)
    }

    pub fn vals_to_coefs(&self, vals: &[f64], a: f64, b: f64) -> Result<ChebExpansion> {
        if vals.len() != self.k {
            return Err(Error::InvalidConfig(format!(
                "expected {} samples, got {}",
                self.k,
                vals.len()
            )));
        }
        if !(b > a) {
            return Err(Error::InvalidConfig(format!("empty interval [{a}, {b}]")));
        }
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(format!("non-finite sample {v}")));
        }
        Ok(ChebExpansion {
            a,
            b,
            coefs: self.coefs(vals),
        })
    }

    /// Goodness-of-fit ratio `max(|a_{k-2}|, |a_{k-1}|) / max_j |a_j|`.
    ///
    /// Values are well represented at precision `eps` when the ratio is below
    /// `eps`. An identically zero sample vector gives 0.
    pub fn fit_ratio(&self, vals: &[f64]) -> f64 {
        let coefs = self.coefs(vals);
        let largest = coefs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if largest == 0.0 {
            return 0.0;
        }
        let tail = coefs[self.k - 2].abs().max(coefs[self.k - 1].abs());
        tail / largest
    }
}

/// Dense product of a real matrix with a vector over any scalar type that a
/// real number can scale (reals, complex numbers).
pub fn matvec<T>(m: &DMatrix<f64>, x: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    debug_assert_eq!(m.ncols(), x.len());
    (0..m.nrows())
        .map(|i| {
            let mut acc = x[0] * m[(i, 0)];
            for j in 1..x.len() {
                acc = acc + x[j] * m[(i, j)];
            }
            acc
        })
        .collect()
}

fn vals2coefs_matrix(k: usize) -> DMatrix<f64> {
    let n = k - 1;
    DMatrix::from_fn(k, k, |j, i| {
        let mut w = 2.0 / n as f64;
        if i == 0 || i == n {
            w *= 0.5;
        }
        if j == 0 || j == n {
            w *= 0.5;
        }
        w * cheb_at_node(j, i, k)
    })
}

fn diff_matrix(k: usize, nodes: &[f64]) -> DMatrix<f64> {
    let n = k - 1;
    let theta = |i: usize| PI * (n - i) as f64 / n as f64;
    let weight = |i: usize| {
        let w = if i % 2 == 0 { 1.0 } else { -1.0 };
        if i == 0 || i == n {
            0.5 * w
        } else {
            w
        }
    };
    let mut d = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                // cos(ti) - cos(tj) without cancellation
                let (ti, tj) = (theta(i), theta(j));
                let dx = -2.0 * ((ti + tj) / 2.0).sin() * ((ti - tj) / 2.0).sin();
                d[(i, j)] = weight(j) / weight(i) / dx;
            }
        }
    }
    for i in 0..k {
        let s: f64 = (0..k).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    debug_assert_eq!(nodes.len(), k);
    d
}

fn integ_matrix(k: usize, vals2coefs: &DMatrix<f64>) -> DMatrix<f64> {
    let mut integ = DMatrix::zeros(k, k);
    for col in 0..k {
        let a: Vec<f64> = (0..k).map(|j| vals2coefs[(j, col)]).collect();
        let coef = |j: usize| if j < k { a[j] } else { 0.0 };
        // antiderivative coefficients b_0..b_k
        let mut b = vec![0.0; k + 1];
        b[1] = coef(0) - coef(2) / 2.0;
        for (j, bj) in b.iter_mut().enumerate().skip(2) {
            *bj = (coef(j - 1) - coef(j + 1)) / (2.0 * j as f64);
        }
        let values: Vec<f64> = (0..k)
            .map(|i| {
                (1..=k)
                    .map(|j| b[j] * cheb_at_node(j, i, k))
                    .sum::<f64>()
            })
            .collect();
        let left = values[0];
        for i in 0..k {
            integ[(i, col)] = values[i] - left;
        }
    }
    integ
}

/// Chebyshev expansion `sum a_j T_j(x)` on `[a, b]`, `x = (2t - a - b)/(b - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebExpansion {
    pub a: f64,
    pub b: f64,
    pub coefs: Vec<f64>,
}

impl ChebExpansion {
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.a && t <= self.b) {
            return Err(Error::OutOfDomain {
                t,
                a: self.a,
                b: self.b,
            });
        }
        let x = (((t - self.a) - (self.b - t)) / (self.b - self.a)).clamp(-1.0, 1.0);
        Ok(clenshaw(&self.coefs, x))
    }
}

/// Clenshaw recurrence for `sum c_j T_j(x)`.
pub fn clenshaw(coefs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coefs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coefs.first().copied().unwrap_or(0.0) + x * b1 - b2
}
