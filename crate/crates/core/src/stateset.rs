// SPDX-License-Identifier: Apache-2.0

//! Candidate state sets over multi-qubit registers: validation, Gram data
//! and the upper-triangular coordinate form with its angle chart.
//!
//! A set of n linearly independent states over q qubits is carried as the
//! 2^q x n column matrix of amplitudes. Triangularization produces the
//! unique upper-triangular, positive-diagonal coordinate matrix sharing the
//! set's Gram matrix, together with the unitary that rotates the states onto
//! those coordinates over the first n computational basis states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cmatrix::{vec_norm, C64, CMatrix};
use crate::numerics::factor::{cholesky_upper, mgs_reorthonormalize, orthonormal_completion};
use crate::tol;

/// Validated set of candidate states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSet {
    qubits: usize,
    /// 2^q x n, states as columns, unit norm.
    coords: CMatrix,
    priors: Option<Vec<f64>>,
}

/// Hermitian PSD overlap matrix, together with the copy power it represents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramMatrix {
    entries: CMatrix,
    copy_power: u32,
}

impl GramMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn copy_power(&self) -> u32 {
        self.copy_power
    }

    pub fn size(&self) -> usize {
        self.entries.rows()
    }
}

impl StateSet {
    /// Normalize and validate raw amplitude vectors.
    pub fn validate(raw: Vec<Vec<C64>>, qubits: usize, priors: Option<Vec<f64>>) -> Result<Self> {
        if qubits == 0 {
            return Err(Error::InvalidInput(
                "state set needs at least one qubit".into(),
            ));
        }
        let dim = 1usize << qubits;
        let n = raw.len();
        if n == 0 {
            return Err(Error::InvalidInput("state set is empty".into()));
        }
        if n > dim {
            return Err(Error::Dimension(format!(
                "{n} states cannot be linearly independent in dimension {dim}"
            )));
        }
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for (index, mut v) in raw.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "state {index} has {} amplitudes, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "state {index} has a non-finite amplitude"
                )));
            }
            let norm = vec_norm(&v);
            if norm < 1e-12 {
                return Err(Error::ZeroState { index });
            }
            for z in v.iter_mut() {
                *z /= norm;
            }
            cols.push(v);
        }
        if let Some(p) = &priors {
            if p.len() != n {
                return Err(Error::Dimension(format!("{} priors for {n} states", p.len())));
            }
            if p.iter().any(|x| *x < 0.0 || !x.is_finite()) {
                return Err(Error::InvalidInput("priors must be nonnegative".into()));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("priors sum to {sum}, expected 1")));
            }
        }
        let coords = CMatrix::from_columns(&cols)?;
        let set = StateSet {
            qubits,
            coords,
            priors,
        };
        set.check_independence()?;
        Ok(set)
    }

    /// Linear independence check. The Cholesky pivot of the Gram matrix at
    /// index j is the distance of state j from the span of its predecessors.
    fn check_independence(&self) -> Result<()> {
        let gram = self.gram();
        match cholesky_upper(gram.entries()) {
            Ok(r) => {
                for j in 0..self.len() {
                    if r[(j, j)].re <= 1e-8 {
                        return Err(Error::LinearDependence { index: j });
                    }
                }
                Ok(())
            }
            Err(Error::CholeskyPivot { index, .. }) => Err(Error::LinearDependence { index }),
            Err(e) => Err(e),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.coords.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.cols() == 0
    }

    pub fn coords(&self) -> &CMatrix {
        &self.coords
    }

    pub fn state(&self, i: usize) -> Vec<C64> {
        self.coords.column(i)
    }

    pub fn priors(&self) -> Option<&[f64]> {
        self.priors.as_deref()
    }

    /// Pairwise overlap matrix.
    pub fn gram(&self) -> GramMatrix {
        let g = self.coords.adjoint().mul(&self.coords).hermitized();
        GramMatrix {
            entries: g,
            copy_power: 1,
        }
    }
}

/// Entrywise M-th power: the Gram matrix of the M-fold tensor-power set.
pub fn gram_power(x: &GramMatrix, m: u32) -> Result<GramMatrix> {
    if m < 1 {
        return Err(Error::InvalidInput("copy power must be at least 1".into()));
    }
    let entries = CMatrix::from_fn(x.entries.rows(), x.entries.cols(), |r, c| {
        x.entries[(r, c)].powu(m)
    })
    .hermitized();
    Ok(GramMatrix {
        entries,
        copy_power: x.copy_power * m,
    })
}

/// Per-column angle parameterization of a triangular coordinate matrix.
///
/// Column i (0-based, i >= 1) carries i polar angles and i phases. The chart
/// is made unique by keeping diagonal entries real positive, which folds all
/// sign freedom into the phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleChart {
    pub size: usize,
    pub columns: Vec<ColumnAngles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnAngles {
    /// thetas[0] fixes the diagonal entry; it must stay in (0, pi) for the
    /// column to keep a positive diagonal.
    pub thetas: Vec<f64>,
    pub mus: Vec<f64>,
}

/// Upper-triangular coordinate form of a state set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangularForm {
    qubits: usize,
    tmat: CMatrix,
    angles: AngleChart,
}

impl TriangularForm {
    /// Build from an upper-triangular matrix with positive real diagonal and
    /// unit-norm columns. Extracts the angle chart and cross-checks that the
    /// chart re-expands to the input.
    pub fn from_tmat(tmat: CMatrix, qubits: usize) -> Result<Self> {
        let n = tmat.rows();
        if tmat.cols() != n {
            return Err(Error::NotSquare {
                rows: tmat.rows(),
                cols: tmat.cols(),
            });
        }
        if n > (1usize << qubits) {
            return Err(Error::Dimension(format!(
                "{n} states do not fit in {qubits} qubits"
            )));
        }
        for c in 0..n {
            for r in c + 1..n {
                if tmat[(r, c)].norm() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not upper triangular at ({r},{c})"
                    )));
                }
            }
            let d = tmat[(c, c)];
            if d.re <= 1e-12 || d.im.abs() > 1e-12 {
                return Err(Error::ZeroDiagonal { index: c });
            }
            let norm = vec_norm(&tmat.column(c));
            if (norm - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "column {c} has norm {norm}, expected 1"
                )));
            }
        }
        let angles = angles_from_triangular(&tmat)?;
        let rebuilt = triangular_from_angles(&angles)?;
        let drift = rebuilt.max_abs_diff(&tmat);
        if drift > 1e-9 {
            return Err(Error::Internal(format!(
                "angle chart re-expansion drifted by {drift:.3e}"
            )));
        }
        Ok(TriangularForm {
            qubits,
            tmat,
            angles,
        })
    }

    pub fn from_angles(angles: AngleChart, qubits: usize) -> Result<Self> {
        if angles.size > (1usize << qubits) {
            return Err(Error::Dimension(format!(
                "{} states do not fit in {qubits} qubits",
                angles.size
            )));
        }
        let tmat = triangular_from_angles(&angles)?;
        Ok(TriangularForm {
            qubits,
            tmat,
            angles,
        })
    }

    pub fn size(&self) -> usize {
        self.tmat.rows()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn tmat(&self) -> &CMatrix {
        &self.tmat
    }

    pub fn angles(&self) -> &AngleChart {
        &self.angles
    }

    /// Gram matrix the form represents.
    pub fn gram(&self) -> CMatrix {
        self.tmat.adjoint().mul(&self.tmat).hermitized()
    }

    /// Column i embedded over the full 2^q-dimensional register.
    pub fn embedded_column(&self, i: usize) -> Vec<C64> {
        let dim = 1usize << self.qubits;
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for r in 0..self.size() {
            v[r] = self.tmat[(r, i)];
        }
        v
    }
}

/// Rotate a validated state set onto its triangular coordinates.
///
/// Returns the triangular form and the unitary `U0` mapping each state onto
/// its triangular column embedded over the first n basis states.
pub fn triangularize(set: &StateSet) -> Result<(TriangularForm, CMatrix)> {
    let gram = set.gram();
    let tmat = cholesky_upper(gram.entries()).map_err(|e| match e {
        Error::CholeskyPivot { index, .. } => Error::LinearDependence { index },
        other => other,
    })?;
    let form = TriangularForm::from_tmat(tmat, set.qubits())?;

    let tinv = form.tmat().upper_inverse()?;
    let q_in = mgs_reorthonormalize(&set.coords().mul(&tinv))?;
    let ext_in = orthonormal_completion(&q_in)?;
    let ext_out = orthonormal_completion(&CMatrix::canonical_columns(set.dim(), set.len()))?;
    let u0 = ext_out.mul(&ext_in.adjoint());

    let unit = u0.unitarity_error();
    if unit > tol::STRUCTURAL {
        return Err(Error::NotUnitary { residual: unit });
    }
    Ok((form, u0))
}

/// Extract the angle chart of an upper-triangular coordinate matrix.
pub fn angles_from_triangular(tmat: &CMatrix) -> Result<AngleChart> {
    let n = tmat.rows();
    if tmat.cols() != n {
        return Err(Error::NotSquare {
            rows: tmat.rows(),
            cols: tmat.cols(),
        });
    }
    let mut columns = Vec::with_capacity(n.saturating_sub(1));
    for ci in 1..n {
        let v: Vec<C64> = (0..=ci).map(|r| tmat[(r, ci)]).collect();
        let diag = v[ci];
        if diag.re <= 1e-12 || diag.im.abs() > 1e-12 {
            return Err(Error::ZeroDiagonal { index: ci });
        }
        // prefix_norm[r] = norm of entries 0..r.
        let mut prefix_norm = vec![0.0f64; ci + 1];
        let mut acc = 0.0f64;
        for r in 0..=ci {
            prefix_norm[r] = acc.sqrt();
            acc += v[r].norm_sqr();
        }
        let mut thetas = Vec::with_capacity(ci);
        thetas.push(f64::atan2(diag.re, prefix_norm[ci]));
        for t in 2..=ci {
            let r = ci - t + 1;
            thetas.push(f64::atan2(v[r].norm(), prefix_norm[r]));
        }
        let mus: Vec<f64> = (0..ci).map(|r| wrap_phase(&v[r])).collect();
        columns.push(ColumnAngles { thetas, mus });
    }
    Ok(AngleChart { size: n, columns })
}

/// Rebuild the triangular coordinate matrix from its angle chart.
pub fn triangular_from_angles(angles: &AngleChart) -> Result<CMatrix> {
    let n = angles.size;
    if angles.columns.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "{} angle columns for size {n}",
            angles.columns.len()
        )));
    }
    let mut tmat = CMatrix::zeros(n, n);
    tmat[(0, 0)] = C64::new(1.0, 0.0);
    for (ci, col) in angles.columns.iter().enumerate().map(|(k, c)| (k + 1, c)) {
        if col.thetas.len() != ci || col.mus.len() != ci {
            return Err(Error::Dimension(format!(
                "column {ci} needs {ci} angles and phases"
            )));
        }
        let theta1 = col.thetas[0];
        if !(theta1 > 0.0 && theta1 < std::f64::consts::PI) {
            return Err(Error::ZeroDiagonal { index: ci });
        }
        tmat[(ci, ci)] = C64::new(theta1.sin(), 0.0);
        let mut prod = theta1.cos();
        for t in 2..=ci {
            let r = ci - t + 1;
            let th = col.thetas[t - 1];
            tmat[(r, ci)] = C64::from_polar(prod * th.sin(), col.mus[r]);
            prod *= th.cos();
        }
        tmat[(0, ci)] = C64::from_polar(prod, col.mus[0]);
    }
    Ok(tmat)
}

fn wrap_phase(z: &C64) -> f64 {
    if z.norm() < 1e-300 {
        return 0.0;
    }
    let a = z.arg();
    let wrapped = if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    };
    if wrapped >= 2.0 * std::f64::consts::PI {
        0.0
    } else {
        wrapped
    }
}
