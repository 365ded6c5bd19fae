// SPDX-License-Identifier: Apache-2.0

//! Row-major dense complex matrix and the handful of vector helpers the
//! synthesis pipeline needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const C_ZERO: C64 = C64::new(0.0, 0.0);
pub const C_ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("ragged row lengths".into()));
        }
        let data: Vec<C64> = rows.into_iter().flatten().collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(CMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let ncols = cols.len();
        let nrows = cols.first().map(|c| c.len()).unwrap_or(0);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::Dimension("ragged column lengths".into()));
        }
        Ok(CMatrix::from_fn(nrows, ncols, |r, c| cols[c][r]))
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = CMatrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    /// The first `k` canonical basis vectors of dimension `d` as columns.
    pub fn canonical_columns(d: usize, k: usize) -> Self {
        CMatrix::from_fn(d, k, |r, c| if r == c { C_ONE } else { C_ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (r, z) in v.iter().enumerate() {
            self[(r, c)] = *z;
        }
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C_ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + rhs[(r, c)])
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - rhs[(r, c)])
    }

    pub fn scaled(&self, s: C64) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |r, c| s * self[(r, c)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * rhs[(r, c)])
    }

    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                if a == C_ZERO {
                    continue;
                }
                for r2 in 0..rhs.rows {
                    for c2 in 0..rhs.cols {
                        out[(r1 * rhs.rows + r2, c1 * rhs.cols + c2)] = a * rhs[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal concatenation of square blocks.
    pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = CMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            assert!(b.is_square());
            for r in 0..b.rows {
                for c in 0..b.cols {
                    out[(off + r, off + c)] = b[(r, c)];
                }
            }
            off += b.rows;
        }
        out
    }

    /// Embed a square matrix as the leading block of a larger identity.
    pub fn embed_leading(&self, dim: usize) -> CMatrix {
        assert!(self.is_square() && self.rows <= dim);
        let mut out = CMatrix::identity(dim);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        out
    }

    /// Unitary differing from the identity only on coordinates `i`, `j`.
    /// `u` is row-major `[u00, u01, u10, u11]` acting on `(e_i, e_j)`.
    pub fn two_level(n: usize, i: usize, j: usize, u: [C64; 4]) -> CMatrix {
        assert!(i < n && j < n && i != j);
        let mut m = CMatrix::identity(n);
        m[(i, i)] = u[0];
        m[(i, j)] = u[1];
        m[(j, i)] = u[2];
        m[(j, j)] = u[3];
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max deviation from Hermitian symmetry.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Max-norm of `U†U - I`.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint()
            .mul(self)
            .max_abs_diff(&CMatrix::identity(self.rows))
    }

    /// Exactly Hermitian average `(A + A†)/2`.
    pub fn hermitized(&self) -> CMatrix {
        assert!(self.is_square());
        CMatrix::from_fn(self.rows, self.cols, |r, c| {
            let z = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
            if r == c {
                C64::new(z.re, 0.0)
            } else {
                z
            }
        })
    }

    /// Inverse of an upper-triangular matrix by back substitution.
    pub fn upper_inverse(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut inv = CMatrix::zeros(n, n);
        for c in 0..n {
            // Solve R x = e_c.
            let mut x = vec![C_ZERO; n];
            for r in (0..n).rev() {
                let mut acc = if r == c { C_ONE } else { C_ZERO };
                for k in r + 1..n {
                    acc -= self[(r, k)] * x[k];
                }
                let d = self[(r, r)];
                if d.norm() < 1e-300 {
                    return Err(Error::ZeroDiagonal { index: r });
                }
                x[r] = acc / d;
            }
            inv.set_column(c, &x);
        }
        Ok(inv)
    }

    /// Inverse of a Hermitian positive definite matrix via its Cholesky factor.
    pub fn pd_inverse(&self) -> Result<CMatrix> {
        let r = super::factor::cholesky_upper(self)?;
        let rinv = r.upper_inverse()?;
        Ok(rinv.mul(&rinv.adjoint()))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `⟨u|v⟩` with conjugation on the first argument.
pub fn vec_inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_abs_diff(u: &[C64], v: &[C64]) -> f64 {
    assert_eq!(u.len(), v.len());
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product of two vectors.
pub fn vec_kron(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}
