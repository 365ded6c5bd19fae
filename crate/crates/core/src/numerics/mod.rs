// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix kernels every other module builds on.
//!
//! All operations are pure functions of immutable inputs and are
//! deterministic: identical inputs produce bitwise identical outputs.

pub mod cmatrix;
pub mod eig;
pub mod factor;

pub use cmatrix::{CMatrix, C64};
pub use eig::{hermitian_eig, EigDecomposition};
pub use factor::{
    cholesky_upper, orthonormal_completion, orthonormal_completion_with, psd_sqrt, psd_sqrt_with,
};
