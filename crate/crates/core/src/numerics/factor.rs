// SPDX-License-Identifier: Apache-2.0

//! Cholesky factorization, positive semidefinite square root and
//! deterministic orthonormal completion.

use super::cmatrix::{vec_inner, vec_norm, C64, CMatrix, C_ZERO};
use super::eig::hermitian_eig;
use crate::error::{Error, Result};
use crate::tol;

/// Upper-triangular `R` with strictly positive real diagonal and `R†R = X`.
///
/// Fails with the index of the first non-positive pivot when `X` is
/// numerically singular or indefinite.
pub fn cholesky_upper(x: &CMatrix) -> Result<CMatrix> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let herm = x.hermiticity_error();
    if herm > tol::STRUCTURAL {
        return Err(Error::NotHermitian { residual: herm });
    }
    let n = x.rows();
    let scale = (0..n)
        .map(|i| x[(i, i)].re.abs())
        .fold(1.0f64, f64::max);
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        let mut s = x[(i, i)].re;
        for k in 0..i {
            s -= r[(k, i)].norm_sqr();
        }
        if s <= tol::CHOLESKY_PIVOT * scale {
            return Err(Error::CholeskyPivot { index: i, value: s });
        }
        let d = s.sqrt();
        r[(i, i)] = C64::new(d, 0.0);
        for j in i + 1..n {
            let mut acc = x[(i, j)];
            for k in 0..i {
                acc -= r[(k, i)].conj() * r[(k, j)];
            }
            r[(i, j)] = acc / d;
        }
    }
    Ok(r)
}

/// Hermitian PSD square root `S` with `S S = A`.
///
/// Eigenvalue dust in `[-neg_tol, 0)` is clamped to zero; anything below
/// `-neg_tol` is an infeasibility error, not a clamp.
pub fn psd_sqrt_with(a: &CMatrix, neg_tol: f64) -> Result<CMatrix> {
    let e = hermitian_eig(a)?;
    let min = e.min_eigenvalue();
    if min < -neg_tol {
        return Err(Error::Indefinite {
            min_eigenvalue: min,
        });
    }
    Ok(e.apply_spectral(|l| l.max(0.0).sqrt()))
}

/// [`psd_sqrt_with`] at the default feasibility tolerance.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    psd_sqrt_with(a, tol::FEASIBILITY)
}

/// Complete `k` orthonormal columns in dimension `d` to a `d x d` unitary.
///
/// The first `k` columns of the result equal the input exactly. The
/// completion is seeded from canonical basis vectors in index order with a
/// fixed pivot rule, so the result is deterministic.
pub fn orthonormal_completion_with(v: &CMatrix, ortho_tol: f64) -> Result<CMatrix> {
    let d = v.rows();
    let k = v.cols();
    if k > d {
        return Err(Error::Dimension(format!(
            "{k} columns cannot be orthonormal in dimension {d}"
        )));
    }
    let cols: Vec<Vec<C64>> = (0..k).map(|c| v.column(c)).collect();
    for i in 0..k {
        for j in i..k {
            let g = vec_inner(&cols[i], &cols[j]);
            let expect = if i == j { 1.0 } else { 0.0 };
            let dev = (g - C64::new(expect, 0.0)).norm();
            if dev > ortho_tol {
                return Err(Error::NotOrthonormal {
                    i,
                    j,
                    deviation: dev,
                });
            }
        }
    }

    let mut basis = cols;
    // Sweep the canonical basis; drop candidates already inside the span.
    // A looser second sweep guards pathological near-degenerate spans.
    for threshold in [1e-4, 1e-8] {
        for cand in 0..d {
            if basis.len() == d {
                break;
            }
            let mut u = vec![C_ZERO; d];
            u[cand] = C64::new(1.0, 0.0);
            let mut drop = false;
            for pass in 0..2 {
                for b in &basis {
                    let ov = vec_inner(b, &u);
                    for (r, z) in b.iter().enumerate() {
                        u[r] -= z * ov;
                    }
                }
                if pass == 0 && vec_norm(&u) <= threshold {
                    drop = true;
                    break;
                }
            }
            if drop {
                continue;
            }
            let norm = vec_norm(&u);
            if norm <= threshold {
                continue;
            }
            for z in u.iter_mut() {
                *z /= norm;
            }
            basis.push(u);
        }
        if basis.len() == d {
            break;
        }
    }
    if basis.len() != d {
        return Err(Error::Internal(
            "orthonormal completion ran out of candidates".into(),
        ));
    }
    CMatrix::from_columns(&basis)
}

/// [`orthonormal_completion_with`] at the default structural tolerance.
pub fn orthonormal_completion(v: &CMatrix) -> Result<CMatrix> {
    orthonormal_completion_with(v, tol::STRUCTURAL)
}

/// Two modified Gram-Schmidt passes over the columns, in column order.
/// Cleans up small orthonormality drift without changing the span.
pub(crate) fn mgs_reorthonormalize(m: &CMatrix) -> Result<CMatrix> {
    let k = m.cols();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
    for c in 0..k {
        let mut u = m.column(c);
        for _ in 0..2 {
            for b in &cols {
                let ov = vec_inner(b, &u);
                for (r, z) in b.iter().enumerate() {
                    u[r] -= z * ov;
                }
            }
        }
        let norm = vec_norm(&u);
        if norm < 1e-6 {
            return Err(Error::LinearDependence { index: c });
        }
        for z in u.iter_mut() {
            *z /= norm;
        }
        cols.push(u);
    }
    CMatrix::from_columns(&cols)
}
