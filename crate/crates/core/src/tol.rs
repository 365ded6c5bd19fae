// SPDX-License-Identifier: Apache-2.0

//! Tolerance policy.
//!
//! Two tiers: `STRUCTURAL` gates structural checks (Hermitian symmetry,
//! unitarity, orthonormality), `FEASIBILITY` gates feasibility decisions on
//! minimum eigenvalues and is a hundred times looser so that instances sitting
//! on the probability boundary classify stably. Callers that need different
//! thresholds use the `*_with` function variants.

/// Tolerance for structural checks.
pub const STRUCTURAL: f64 = 1e-10;

/// Tolerance for feasibility decisions on minimum eigenvalues.
pub const FEASIBILITY: f64 = 1e-8;

/// Allowed negative dust when locating the exact boundary of the feasible
/// region by bisection. Bisecting against `FEASIBILITY` itself would shift
/// the located probability off the true boundary by up to 1e-8.
pub(crate) const BISECTION_PSD: f64 = 1e-12;

/// Cholesky pivots at or below this (relative to the diagonal scale) are
/// treated as loss of positive definiteness.
pub(crate) const CHOLESKY_PIVOT: f64 = 1e-13;
