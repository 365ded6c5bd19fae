// SPDX-License-Identifier: Apache-2.0

//! Compiles sets of linearly independent multi-qubit states plus target
//! success probabilities into verified gate netlists that realize
//! probabilistic identification and probabilistic cloning machines.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`stateset`] validates the candidate states, computes Gram data and
//!    brings the set into upper-triangular coordinate form.
//! 2. [`feasibility`] decides whether the requested success probabilities
//!    are achievable and extracts the spectral data feeding synthesis.
//! 3. [`synthesis`] builds the core unitary, the pairwise compression
//!    operators and their cascades, and assembles a full circuit plan.
//! 4. [`gatecomp`] lowers every dense operator in the plan to a netlist of
//!    X, CNOT and multi-controlled single-qubit gates.
//! 5. [`simulator`] executes plans and netlists on a dense statevector and
//!    checks the branch statistics against the synthesis contract.

pub mod error;
pub mod feasibility;
pub mod gatecomp;
pub mod numerics;
pub mod simulator;
pub mod stateset;
pub mod synthesis;
pub mod tol;

pub use error::{Error, Result};
pub use numerics::cmatrix::{CMatrix, C64};
