//! Lowest eigenpair of real symmetric sparse matrices.
//!
//! Small problems go to a dense symmetric eigensolver; large ones to a
//! restarted Lanczos iteration with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Sizes up to this use the dense solver under [`EigenMethod::Auto`].
pub const DENSE_LIMIT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Symmetric matrix stored as a diagonal plus off-diagonal CSR rows (each
/// off-diagonal pair stored in both rows).
#[derive(Debug, Clone)]
pub struct SymSparse {
    pub diag: Vec<f64>,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymSparse {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_into(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mut acc = self.diag[i] * v[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            out[i] = acc;
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }

    /// Gershgorin bound on the spectral radius.
    fn norm_bound(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                self.diag[i].abs()
                    + self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
                        .iter()
                        .map(|v| v.abs())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Smallest eigenvalue and a unit eigenvector. `start` seeds the Lanczos
/// iteration and should overlap the wanted eigenvector.
pub fn lowest_eigenpair(m: &SymSparse, start: &[f64], method: EigenMethod) -> Result<(f64, Vec<f64>)> {
    let dense = match method {
        EigenMethod::Auto => m.len() <= DENSE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
    };
    if dense {
        Ok(dense_lowest(m))
    } else {
        lanczos_lowest(m, start)
    }
}

fn dense_lowest(m: &SymSparse) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(m.to_dense());
    let (i, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    (lambda, eig.eigenvectors.column(i).iter().copied().collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

fn lanczos_lowest(m: &SymSparse, start: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = m.len();
    let basis_size = (25_000_000 / n.max(1)).clamp(20, 100).min(n);
    let scale = m.norm_bound().max(1.0);
    let tol = 1e-13 * scale;
    let mut v0 = start.to_vec();
    if normalize(&mut v0) == 0.0 || !v0.iter().all(|x| x.is_finite()) {
        return Err(Error::Solver("zero Lanczos start vector".into()));
    }
    let mut w = vec![0.0; n];
    for _ in 0..2000 {
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut alpha = Vec::with_capacity(basis_size);
        let mut beta: Vec<f64> = Vec::with_capacity(basis_size);
        let mut last_beta = 0.0;
        for j in 0..basis_size {
            m.mul_into(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = dot(&w, &w).sqrt();
            last_beta = bnorm;
            if j + 1 == basis_size || bnorm <= 1e-14 * scale {
                break;
            }
            beta.push(bnorm);
            basis.push(w.iter().map(|x| x / bnorm).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let y = eig.eigenvectors.column(idx);
        let mut x = vec![0.0; n];
        for (c, b) in y.iter().zip(&basis) {
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
        }
        normalize(&mut x);
        let residual = (last_beta * y[k - 1]).abs();
        if residual <= tol || k == n {
            return Ok((theta, x));
        }
        v0 = x;
    }
    Err(Error::Solver("Lanczos iteration did not converge".into()))
}
