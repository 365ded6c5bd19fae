// SPDX-License-Identifier: Apache-2.0

//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
//!
//! Dimensions in this crate stay at a few hundred, where Jacobi's robustness
//! and determinism matter more than asymptotic speed. Eigenvalues come back
//! sorted ascending; within a degenerate cluster the eigenvector basis is
//! canonicalized by Gram-Schmidt against the canonical basis vectors in index
//! order, so identical inputs always produce identical outputs.

use super::cmatrix::{vec_inner, vec_norm, C64, CMatrix, C_ZERO};
use crate::error::{Error, Result};
use crate::tol;

/// Eigenvalues sorted ascending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let d = CMatrix::diag(&self.eigenvalues.iter().map(|&l| f(l)).collect::<Vec<_>>());
        v.mul(&d).mul(&v.adjoint()).hermitized()
    }
}

const MAX_SWEEPS: usize = 100;

pub fn hermitian_eig(a: &CMatrix) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let herm = a.hermiticity_error();
    if herm > tol::STRUCTURAL {
        return Err(Error::NotHermitian { residual: herm });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }

    let mut b = a.hermitized();
    let mut v = CMatrix::identity(n);
    let scale = b.max_abs().max(1.0);
    let stop = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(b[(p, q)].norm());
            }
        }
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = b[(p, q)];
                let babs = beta.norm();
                if babs <= stop * 0.01 {
                    continue;
                }
                rotate(&mut b, &mut v, p, q, beta, babs);
            }
        }
    }
    if !converged {
        // One last check after the final sweep.
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(b[(p, q)].norm());
            }
        }
        if off > stop {
            return Err(Error::Internal(format!(
                "Jacobi sweep limit reached (off-diagonal {off:.3e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        b[(i, i)]
            .re
            .partial_cmp(&b[(j, j)].re)
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| b[(i, i)].re).collect();
    let mut vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);

    canonicalize_clusters(&eigenvalues, &mut vectors, scale);

    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// One complex Jacobi rotation zeroing `b[p][q]`.
fn rotate(b: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, beta: C64, babs: f64) {
    let n = b.rows();
    let phase = beta / babs;
    let alpha = b[(p, p)].re;
    let delta = b[(q, q)].re;
    let tau = (delta - alpha) / (2.0 * babs);
    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J has J[p][p]=c, J[p][q]=s*phase, J[q][p]=-s*conj(phase), J[q][q]=c.
    let sp = phase.scale(s);
    let spc = phase.conj().scale(s);

    // B <- B J (columns p, q).
    for k in 0..n {
        let u = b[(k, p)];
        let w = b[(k, q)];
        b[(k, p)] = u.scale(c) - w * spc;
        b[(k, q)] = u * sp + w.scale(c);
    }
    // B <- J† B (rows p, q).
    for k in 0..n {
        let u = b[(p, k)];
        let w = b[(q, k)];
        b[(p, k)] = u.scale(c) - w * sp;
        b[(q, k)] = u * spc + w.scale(c);
    }
    // Kill round-off drift on the entries the rotation determines exactly.
    b[(p, q)] = C_ZERO;
    b[(q, p)] = C_ZERO;
    b[(p, p)] = C64::new(b[(p, p)].re, 0.0);
    b[(q, q)] = C64::new(b[(q, q)].re, 0.0);

    // V <- V J.
    for k in 0..n {
        let u = v[(k, p)];
        let w = v[(k, q)];
        v[(k, p)] = u.scale(c) - w * spc;
        v[(k, q)] = u * sp + w.scale(c);
    }
}

/// Replace the eigenvector basis of each degenerate cluster by the
/// deterministic basis obtained from projecting canonical basis vectors.
fn canonicalize_clusters(eigenvalues: &[f64], vectors: &mut CMatrix, scale: f64) {
    let n = eigenvalues.len();
    let ctol = 1e-11 * scale.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[end - 1]).abs() <= ctol {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_one(vectors, start, end);
        }
        start = end;
    }
}

fn canonicalize_one(vectors: &mut CMatrix, start: usize, end: usize) {
    let d = vectors.rows();
    let k = end - start;
    let cluster: Vec<Vec<C64>> = (start..end).map(|c| vectors.column(c)).collect();
    // Projector columns P e_j = sum_m v_m conj(v_m[j]).
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(k);
    for threshold in [1e-6, 1e-9] {
        for j in 0..d {
            if accepted.len() == k {
                break;
            }
            let mut u = vec![C_ZERO; d];
            for m in &cluster {
                let coef = m[j].conj();
                for (r, z) in m.iter().enumerate() {
                    u[r] += z * coef;
                }
            }
            // Two Gram-Schmidt passes against what we already kept.
            for _ in 0..2 {
                for a in &accepted {
                    let ov = vec_inner(a, &u);
                    for (r, z) in a.iter().enumerate() {
                        u[r] -= z * ov;
                    }
                }
            }
            let norm = vec_norm(&u);
            if norm > threshold {
                for z in u.iter_mut() {
                    *z /= norm;
                }
                accepted.push(u);
            }
        }
        if accepted.len() == k {
            break;
        }
    }
    if accepted.len() == k {
        for (offset, col) in accepted.iter().enumerate() {
            vectors.set_column(start + offset, col);
        }
    }
    // If the projector sweep could not produce a full basis (it always can in
    // practice), the Jacobi vectors are left as they are: still orthonormal,
    // just not canonicalized.
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reconstruction_error(a: &CMatrix, e: &EigDecomposition) -> f64 {
        e.apply_spectral(|l| l).max_abs_diff(a)
    }

    #[test]
    fn identity_has_unit_eigenvalues_and_canonical_vectors() {
        let a = CMatrix::identity(2);
        let e = hermitian_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        // Degenerate cluster canonicalization yields the identity basis.
        assert!(e.eigenvectors.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn two_state_overlap_matrix_eigenvalues() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(s, 0.0)],
            vec![c(s, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eig(&a).unwrap();
        // Oracle: roots of the characteristic polynomial x^2 - 2x + (1 - s^2).
        let disc = (4.0 - 4.0 * (1.0 - s * s)).sqrt();
        let lo = (2.0 - disc) / 2.0;
        let hi = (2.0 + disc) / 2.0;
        assert!((e.eigenvalues[0] - lo).abs() < 1e-12);
        assert!((e.eigenvalues[1] - hi).abs() < 1e-12);
        assert!((e.eigenvalues[0] - (1.0 - s)).abs() < 1e-12);
        assert!((e.eigenvalues[1] - (1.0 + s)).abs() < 1e-12);
        assert!(reconstruction_error(&a, &e) < 1e-12);
    }

    #[test]
    fn diagonal_input_sorts_ascending() {
        let a = CMatrix::diag(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert!(reconstruction_error(&a, &e) < 1e-14);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eig(&rect),
            Err(Error::NotSquare { .. })
        ));
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(
            hermitian_eig(&a),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let a = CMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.3, 0.4), c(0.0, -0.2)],
            vec![c(0.3, -0.4), c(1.0, 0.0), c(0.1, 0.0)],
            vec![c(0.0, 0.2), c(0.1, 0.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eig(&a).unwrap();
        assert!(reconstruction_error(&a, &e) < 1e-12);
        assert!(e.eigenvectors.unitarity_error() < 1e-12);
        // Deterministic: run twice, compare bitwise.
        let e2 = hermitian_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, e2.eigenvalues);
        assert_eq!(e.eigenvectors, e2.eigenvectors);
    }

    #[test]
    fn degenerate_cluster_is_deterministic() {
        // Projector onto span{(1,1)/sqrt2} plus identity: eigenvalues {1,1,2}.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [c(s, 0.0), c(s, 0.0), C_ZERO];
        let mut a = CMatrix::identity(3);
        for r in 0..3 {
            for col in 0..3 {
                a[(r, col)] += v[r] * v[col].conj();
            }
        }
        let e = hermitian_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[2] - 2.0).abs() < 1e-12);
        assert!(reconstruction_error(&a, &e) < 1e-10);
        let e2 = hermitian_eig(&a).unwrap();
        assert_eq!(e.eigenvectors, e2.eigenvectors);
    }
}
