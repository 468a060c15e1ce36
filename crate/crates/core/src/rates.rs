//! Sparse off-diagonal rate storage shared by every generator in the crate.
//!
//! A [`RateMatrix`] stores the jump intensities `r(x, y)` for `x != y` in
//! compressed-row form together with the exit rates `q(x) = sum_y r(x, y)`.
//! The diagonal of the generator is implicit (`-q(x)`), so every generator
//! built from a `RateMatrix` has rows summing to zero by construction.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    exit: Vec<f64>,
}

/// Row-by-row builder. Rows must be pushed in order; entries within a row may
/// arrive in any order and duplicates are summed.
#[derive(Debug)]
pub struct RateMatrixBuilder {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    scratch: Vec<(usize, f64)>,
}

impl RateMatrixBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Push one row given as `(column, rate)` pairs. Zero rates and the
    /// diagonal are dropped.
    pub fn push_row<I>(&mut self, entries: I) -> Result<()>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let row = self.row_ptr.len() - 1;
        if row >= self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: row + 1,
            });
        }
        self.scratch.clear();
        for (c, v) in entries {
            if c >= self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: c + 1,
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param("rate", format!("rate {v} at ({row}, {c})")));
            }
            if c != row && v > 0.0 {
                self.scratch.push((c, v));
            }
        }
        self.scratch.sort_by_key(|&(c, _)| c);
        let mut last: Option<usize> = None;
        for &(c, v) in &self.scratch {
            if last == Some(c) {
                *self.vals.last_mut().unwrap() += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = Some(c);
            }
        }
        self.row_ptr.push(self.cols.len());
        Ok(())
    }

    pub fn finish(self) -> Result<RateMatrix> {
        if self.row_ptr.len() - 1 != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: self.row_ptr.len() - 1,
            });
        }
        let exit = (0..self.n)
            .map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect();
        Ok(RateMatrix {
            n: self.n,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
            exit,
        })
    }
}

impl RateMatrix {
    /// Build from a dense matrix; the diagonal is ignored.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n = dense.len();
        let mut b = RateMatrixBuilder::new(n);
        for row in dense {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            b.push_row(row.iter().copied().enumerate())?;
        }
        b.finish()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Off-diagonal entries of row `i` as `(column, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub(crate) fn row_slices(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    /// Rate from `i` to `j` (`0` if no edge, `-q(i)` on the diagonal).
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return -self.exit[i];
        }
        let (cols, vals) = self.row_slices(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn exit_rate(&self, i: usize) -> f64 {
        self.exit[i]
    }

    pub fn exit_rates(&self) -> &[f64] {
        &self.exit
    }

    /// Full generator as a dense row-major matrix (diagonal `-q`).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
            row[i] = -self.exit[i];
        }
        out
    }

    /// `(L f)(x) = sum_y r(x, y) (f(y) - f(x))`.
    pub fn apply_generator(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, r)| r * (f[j] - f[i])).sum())
            .collect()
    }

    /// `(pi^T L)(y)`; zero for every `y` iff `pi` is stationary.
    pub fn left_apply_generator(&self, pi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.n).map(|i| -pi[i] * self.exit[i]).collect();
        for i in 0..self.n {
            for (j, r) in self.row(i) {
                out[j] += pi[i] * r;
            }
        }
        out
    }

    /// Largest relative detailed-balance violation
    /// `|pi(x) r(x,y) - pi(y) r(y,x)| / max(pi(x) r(x,y), pi(y) r(y,x))`.
    pub fn detailed_balance_violation(&self, pi: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for (j, r) in self.row(i) {
                let fwd = pi[i] * r;
                let bwd = pi[j] * self.rate(j, i);
                let scale = fwd.max(bwd);
                if scale > 0.0 {
                    worst = worst.max((fwd - bwd).abs() / scale);
                }
            }
        }
        worst
    }

    /// Check every state reaches every other state (one communicating class).
    pub fn is_irreducible(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let reach = |forward: bool| -> bool {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
            for i in 0..self.n {
                for (j, _) in self.row(i) {
                    if forward {
                        adj[i].push(j);
                    } else {
                        adj[j].push(i);
                    }
                }
            }
            let mut seen = vec![false; self.n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// New matrix with every rate transformed by `f(from, to, rate)`.
    pub fn map_rates(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Result<Self> {
        let mut b = RateMatrixBuilder::new(self.n);
        for i in 0..self.n {
            let row: Vec<(usize, f64)> = self.row(i).map(|(j, r)| (j, f(i, j, r))).collect();
            b.push_row(row)?;
        }
        b.finish()
    }
}
