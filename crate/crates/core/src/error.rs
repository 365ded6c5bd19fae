// SPDX-License-Identifier: Apache-2.0

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (max deviation {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("Cholesky pivot {index} is not positive (value {value:.3e})")]
    CholeskyPivot { index: usize, value: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("columns {i} and {j} are not orthonormal (overlap deviation {deviation:.3e})")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },

    #[error("state {index} is linearly dependent on the preceding states")]
    LinearDependence { index: usize },

    #[error("state {index} has (near-)zero norm and cannot be normalized")]
    ZeroState { index: usize },

    #[error("requested success probabilities are infeasible (min eigenvalue {min_eigenvalue:.3e})")]
    Infeasible { min_eigenvalue: f64 },

    #[error("image Gram mismatch {residual:.3e}: probabilities and failure matrix are inconsistent")]
    GramMismatch { residual: f64 },

    #[error("triangular column {index} has a zero diagonal entry")]
    ZeroDiagonal { index: usize },

    #[error("paired states lost linear independence (pivot {index})")]
    DependentPairing { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("netlist parse error at line {line}: {message}")]
    NetlistParse { line: usize, message: String },

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
