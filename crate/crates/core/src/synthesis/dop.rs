// SPDX-License-Identifier: Apache-2.0

//! Pairwise compression operators and their cascades.
//!
//! A compression operator D acts on two q-qubit registers and concentrates
//! the information of a matched pair of candidate states into the upper
//! register, resetting the lower one to the blank pattern:
//!
//!   D |psi_i(theta)>_A |psi_i(xi)>_B  =  |psi_i(eta)>_A |0...0>_B
//!
//! The compressed form eta is fixed by unitarity: its Gram matrix must equal
//! the entrywise product of the two input Gram matrices, so its triangular
//! coordinates are the Cholesky factor of that product. Chaining compressions
//! down a row of registers folds K copies into one register whose Gram matrix
//! is the entrywise K-th power of the original.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cmatrix::{vec_kron, CMatrix};
use crate::numerics::factor::{cholesky_upper, mgs_reorthonormalize, orthonormal_completion};
use crate::stateset::TriangularForm;
use crate::tol;

/// Compression operator together with the forms it connects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DOperator {
    pub theta: TriangularForm,
    pub xi: TriangularForm,
    pub eta: TriangularForm,
    /// Unitary over both registers; upper register bits are most significant.
    pub matrix: CMatrix,
}

/// One cascade stage: the operator plus the register pair it acts on,
/// in application order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeStage {
    pub op: DOperator,
    pub upper_register: usize,
    pub lower_register: usize,
}

/// Ordered compression stages folding K matched copies into register 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadePlan {
    pub stages: Vec<CascadeStage>,
    /// Forms xi_1 = theta, xi_2, ..., xi_K taken by register 0 as the
    /// cascade progresses; the last entry is the fully compressed form.
    pub xi_sequence: Vec<TriangularForm>,
}

impl CascadePlan {
    pub fn compressed_form(&self) -> &TriangularForm {
        self.xi_sequence.last().expect("cascade has at least xi_1")
    }
}

/// Build the compression operator for a pair of triangular forms.
pub fn build_d_operator(theta: &TriangularForm, xi: &TriangularForm) -> Result<DOperator> {
    let n = theta.size();
    let q = theta.qubits();
    if xi.size() != n || xi.qubits() != q {
        return Err(Error::Dimension(
            "compression inputs must share state count and register width".into(),
        ));
    }
    let reg_dim = 1usize << q;
    let dim = reg_dim * reg_dim;

    // Unitarity forces the compressed Gram to be the entrywise product.
    let x = theta.gram().hadamard(&xi.gram()).hermitized();
    let t_eta = cholesky_upper(&x).map_err(|e| match e {
        Error::CholeskyPivot { index, .. } => Error::DependentPairing { index },
        other => other,
    })?;
    let eta = TriangularForm::from_tmat(t_eta, q)?;

    // Joint coordinates of the matched pairs.
    let pair_cols: Vec<Vec<_>> = (0..n)
        .map(|i| vec_kron(&theta.embedded_column(i), &xi.embedded_column(i)))
        .collect();
    let g = CMatrix::from_columns(&pair_cols)?;

    // Orthonormal images of the blank-pattern targets inside the pair span.
    let w = mgs_reorthonormalize(&g.mul(&eta.tmat().upper_inverse()?))?;
    let w_full = orthonormal_completion(&w)?;

    // The inverse operator carries w_i at the column of |pattern i>|blank>;
    // the remaining completion columns fill the other positions in order.
    let special: Vec<usize> = (0..n).map(|i| i * reg_dim).collect();
    let mut d_inv = CMatrix::zeros(dim, dim);
    for (i, &pos) in special.iter().enumerate() {
        d_inv.set_column(pos, &w_full.column(i));
    }
    let mut next = n;
    for pos in 0..dim {
        if special.contains(&pos) {
            continue;
        }
        d_inv.set_column(pos, &w_full.column(next));
        next += 1;
    }
    let matrix = d_inv.adjoint();

    let unit = matrix.unitarity_error();
    if unit > tol::STRUCTURAL {
        return Err(Error::NotUnitary { residual: unit });
    }
    Ok(DOperator {
        theta: theta.clone(),
        xi: xi.clone(),
        eta,
        matrix,
    })
}

/// Chain compressions over `copies` registers all prepared in form `theta`.
///
/// Stages are listed in application order: the bottom register pair first,
/// finishing with the pair (0, 1). After the full cascade register 0 holds
/// the compressed form whose Gram matrix is the entrywise `copies`-th power
/// of theta's.
pub fn build_cascade(theta: &TriangularForm, copies: usize) -> Result<CascadePlan> {
    if copies < 1 {
        return Err(Error::InvalidInput("cascade needs at least one copy".into()));
    }
    let mut xi_sequence = vec![theta.clone()];
    let mut stages = Vec::with_capacity(copies.saturating_sub(1));
    for t in 1..copies {
        let current = xi_sequence.last().expect("non-empty").clone();
        let op = build_d_operator(theta, &current)?;
        xi_sequence.push(op.eta.clone());
        stages.push(CascadeStage {
            op,
            upper_register: copies - t - 1,
            lower_register: copies - t,
        });
    }
    Ok(CascadePlan {
        stages,
        xi_sequence,
    })
}
