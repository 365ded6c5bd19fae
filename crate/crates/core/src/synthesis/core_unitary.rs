// SPDX-License-Identifier: Apache-2.0

//! The core unitary acting on the compressed register and the probe.
//!
//! On the working subspace spanned by the first n register patterns paired
//! with the probe, the machine must send each encoded input to its success
//! target weighted by sqrt(gamma_i) on the success probe branch plus its
//! failure amplitudes on the initial probe branch. The default construction
//! extends that prescription to a full unitary by isometry extension, which
//! satisfies the contract by construction. The spectral construction builds
//! the sandwiched rotation form from the core spectrum instead; it is kept
//! for cross-validation and its contract residual is measured, not assumed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::SpectralData;
use crate::numerics::cmatrix::{vec_max_abs_diff, C64, CMatrix};
use crate::numerics::factor::{mgs_reorthonormalize, orthonormal_completion_with};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoreConstruction {
    Isometry,
    Spectral,
}

impl std::fmt::Display for CoreConstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoreConstruction::Isometry => write!(f, "isometry"),
            CoreConstruction::Spectral => write!(f, "spectral"),
        }
    }
}

/// Unitary over the interleaved (pattern, probe) basis of the working
/// subspace: local index = 2 * pattern + probe bit, dimension 2n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreUnitary {
    pub matrix: CMatrix,
    pub basis_labels: Vec<String>,
    pub construction: CoreConstruction,
    /// Worst-case deviation of the matrix action on the encoded inputs from
    /// the synthesis contract.
    pub contract_residual: f64,
}

/// Shared context: input coordinates, success targets, probabilities and
/// failure amplitudes, plus the probe bit that flags success.
pub struct CoreSpec<'a> {
    /// n x n triangular input coordinates on the first n register patterns.
    pub t_in: &'a CMatrix,
    /// n x n success-target coordinates (identity for identification,
    /// the expanded triangular form for cloning).
    pub t_out: &'a CMatrix,
    pub gamma: &'a [f64],
    /// Hermitian failure-amplitude matrix; column i holds the failure
    /// coordinates of input i.
    pub c: &'a CMatrix,
    pub probe_success: u8,
    /// "phi~" for identification targets, "beta" for clone targets.
    pub target_tag: &'a str,
}

impl CoreSpec<'_> {
    fn n(&self) -> usize {
        self.t_in.cols()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.t_in.rows() != n || self.t_out.rows() != n || self.t_out.cols() != n {
            return Err(Error::Dimension("core coordinate blocks must be n x n".into()));
        }
        if self.gamma.len() != n || self.c.rows() != n || self.c.cols() != n {
            return Err(Error::Dimension(
                "probability and failure blocks must match the state count".into(),
            ));
        }
        if self.probe_success > 1 {
            return Err(Error::InvalidInput("probe success flag must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Encoded input i on the 2n-dimensional working basis.
    pub fn input_vector(&self, i: usize) -> Vec<C64> {
        let n = self.n();
        let p0 = (1 - self.probe_success) as usize;
        let mut v = vec![C64::new(0.0, 0.0); 2 * n];
        for r in 0..n {
            v[2 * r + p0] = self.t_in[(r, i)];
        }
        v
    }

    /// Contract image of input i.
    pub fn target_vector(&self, i: usize) -> Vec<C64> {
        let n = self.n();
        let p0 = (1 - self.probe_success) as usize;
        let p1 = self.probe_success as usize;
        let root = self.gamma[i].sqrt();
        let mut v = vec![C64::new(0.0, 0.0); 2 * n];
        for r in 0..n {
            v[2 * r + p0] = self.c[(r, i)];
            v[2 * r + p1] = self.t_out[(r, i)].scale(root);
        }
        v
    }

    fn labels(&self) -> Vec<String> {
        let n = self.n();
        let mut labels = vec![String::new(); 2 * n];
        for i in 0..n {
            let p0 = (1 - self.probe_success) as usize;
            let p1 = self.probe_success as usize;
            labels[2 * i + p0] = format!("alpha{}*P0", i + 1);
            labels[2 * i + p1] = format!("{}{}*P1", self.target_tag, i + 1);
        }
        labels
    }

    fn residual_of(&self, u: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n() {
            let img = u.mul_vec(&self.input_vector(i));
            worst = worst.max(vec_max_abs_diff(&img, &self.target_vector(i)));
        }
        worst
    }
}

/// Contract-exact core by isometry extension.
///
/// The encoded inputs and their contract images must share a Gram matrix for
/// an isometry between them to exist; a mismatch beyond tolerance signals an
/// inconsistent probability/failure pair and is rejected. The extension to
/// the full space is seeded deterministically from canonical basis vectors.
pub fn build_core_isometry(spec: &CoreSpec) -> Result<CoreUnitary> {
    spec.validate()?;
    let n = spec.n();

    let inputs = CMatrix::from_columns(
        &(0..n).map(|i| spec.input_vector(i)).collect::<Vec<_>>(),
    )?;
    let images = CMatrix::from_columns(
        &(0..n).map(|i| spec.target_vector(i)).collect::<Vec<_>>(),
    )?;

    let gram_in = inputs.adjoint().mul(&inputs).hermitized();
    let gram_out = images.adjoint().mul(&images).hermitized();
    let mismatch = gram_in.max_abs_diff(&gram_out);
    if mismatch > tol::FEASIBILITY {
        return Err(Error::GramMismatch { residual: mismatch });
    }

    let tri = crate::numerics::factor::cholesky_upper(&gram_in)?;
    let tinv = tri.upper_inverse()?;
    let q_in = mgs_reorthonormalize(&inputs.mul(&tinv))?;
    let q_out = mgs_reorthonormalize(&images.mul(&tinv))?;
    let ext_in = orthonormal_completion_with(&q_in, tol::STRUCTURAL)?;
    let ext_out = orthonormal_completion_with(&q_out, tol::STRUCTURAL)?;
    let u = ext_out.mul(&ext_in.adjoint());

    let unit = u.unitarity_error();
    if unit > tol::STRUCTURAL {
        return Err(Error::NotUnitary { residual: unit });
    }
    let residual = spec.residual_of(&u);
    Ok(CoreUnitary {
        matrix: u,
        basis_labels: spec.labels(),
        construction: CoreConstruction::Isometry,
        contract_residual: residual,
    })
}

/// Probe rotation sending the initial probe value to a superposition of
/// initial and success values, expressed on physical probe bits.
pub fn success_rotation(m: f64, probe_success: u8) -> [C64; 4] {
    let f = (1.0 - m).max(0.0).sqrt();
    let e = m.max(0.0).sqrt();
    let (f, e) = (C64::new(f, 0.0), C64::new(e, 0.0));
    if probe_success == 1 {
        // bit 0 = initial, bit 1 = success
        [f, -e, e, f]
    } else {
        [f, e, -e, f]
    }
}

/// Core in the sandwiched rotation form `(V ⊗ I) S (V ⊗ I)†`, where `S`
/// rotates the probe by the core spectrum pattern by pattern.
///
/// Always unitary; its deviation from the synthesis contract is measured on
/// the encoded inputs and recorded, never assumed to vanish.
pub fn build_core_spectral(sd: &SpectralData, spec: &CoreSpec) -> Result<CoreUnitary> {
    spec.validate()?;
    let n = spec.n();
    if sd.m.len() != n || sd.v.rows() != n {
        return Err(Error::Dimension("spectral data size mismatch".into()));
    }
    if sd.m.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::InvalidInput(
            "core spectrum entries must lie in [0, 1]".into(),
        ));
    }
    let i2 = CMatrix::identity(2);
    let v_lift = sd.v.kron(&i2);
    let blocks: Vec<CMatrix> = (0..n)
        .map(|i| {
            let u = success_rotation(sd.m[i], spec.probe_success);
            CMatrix::from_rows(vec![vec![u[0], u[1]], vec![u[2], u[3]]]).expect("2x2 block")
        })
        .collect();
    let block_refs: Vec<&CMatrix> = blocks.iter().collect();
    let s = CMatrix::block_diag(&block_refs);
    let u = v_lift.mul(&s).mul(&v_lift.adjoint());

    let unit = u.unitarity_error();
    if unit > tol::STRUCTURAL {
        return Err(Error::NotUnitary { residual: unit });
    }
    let residual = spec.residual_of(&u);
    Ok(CoreUnitary {
        matrix: u,
        basis_labels: spec.labels(),
        construction: CoreConstruction::Spectral,
        contract_residual: residual,
    })
}
