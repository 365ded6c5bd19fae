// SPDX-License-Identifier: Apache-2.0

//! Feasibility of requested success probabilities, uniform-probability
//! maximization, and the spectral data feeding circuit synthesis.
//!
//! A probability allocation is feasible for identification when the slack
//! matrix `X^(M) - Γ` is positive semidefinite, and for cloning when
//! `X^(M) - √Γ X^(N) √Γ` is. The failure-amplitude matrix `C` is fixed to
//! the Hermitian PSD square root of the slack, which makes every downstream
//! matrix deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cmatrix::{C64, CMatrix};
use crate::numerics::eig::hermitian_eig;
use crate::numerics::factor::psd_sqrt;
use crate::stateset::GramMatrix;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MachineMode {
    Identification,
    Clone,
}

impl std::fmt::Display for MachineMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MachineMode::Identification => write!(f, "identification"),
            MachineMode::Clone => write!(f, "clone"),
        }
    }
}

/// Per-state success probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityAllocation {
    pub gamma: Vec<f64>,
    pub mode: MachineMode,
}

impl ProbabilityAllocation {
    pub fn new(gamma: Vec<f64>, mode: MachineMode) -> Result<Self> {
        if gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::InvalidInput(
                "success probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(ProbabilityAllocation { gamma, mode })
    }

    pub fn uniform(value: f64, n: usize, mode: MachineMode) -> Result<Self> {
        Self::new(vec![value; n], mode)
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Outcome of a feasibility check: the slack matrix and its minimum
/// eigenvalue. `feasible` holds exactly when the minimum eigenvalue clears
/// the feasibility tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub slack: CMatrix,
    pub min_eigenvalue: f64,
}

fn slack_identification(xm: &CMatrix, gamma: &[f64]) -> CMatrix {
    let mut slack = xm.clone();
    for (i, g) in gamma.iter().enumerate() {
        slack[(i, i)] -= C64::new(*g, 0.0);
    }
    slack.hermitized()
}

fn slack_clone(xm: &CMatrix, xn: &CMatrix, gamma: &[f64]) -> CMatrix {
    let n = gamma.len();
    let scaled = CMatrix::from_fn(n, n, |r, c| {
        xn[(r, c)] * (gamma[r].sqrt() * gamma[c].sqrt())
    });
    xm.sub(&scaled).hermitized()
}

fn report_from_slack(slack: CMatrix, threshold: f64) -> Result<FeasibilityReport> {
    let min = hermitian_eig(&slack)?.min_eigenvalue();
    Ok(FeasibilityReport {
        feasible: min >= -threshold,
        slack,
        min_eigenvalue: min,
    })
}

/// Identification feasibility at a caller-supplied eigenvalue threshold.
pub fn check_identification_with(
    xm: &GramMatrix,
    alloc: &ProbabilityAllocation,
    threshold: f64,
) -> Result<FeasibilityReport> {
    if alloc.len() != xm.size() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} states",
            alloc.len(),
            xm.size()
        )));
    }
    report_from_slack(slack_identification(xm.entries(), &alloc.gamma), threshold)
}

pub fn check_identification(
    xm: &GramMatrix,
    alloc: &ProbabilityAllocation,
) -> Result<FeasibilityReport> {
    check_identification_with(xm, alloc, tol::FEASIBILITY)
}

/// Clone feasibility at a caller-supplied eigenvalue threshold.
pub fn check_clone_with(
    xm: &GramMatrix,
    xn: &GramMatrix,
    alloc: &ProbabilityAllocation,
    threshold: f64,
) -> Result<FeasibilityReport> {
    if alloc.len() != xm.size() || xm.size() != xn.size() {
        return Err(Error::Dimension(
            "probability and Gram sizes disagree".into(),
        ));
    }
    if xm.copy_power() >= xn.copy_power() {
        return Err(Error::InvalidInput(format!(
            "clone needs more output copies than inputs ({} >= {})",
            xm.copy_power(),
            xn.copy_power()
        )));
    }
    report_from_slack(
        slack_clone(xm.entries(), xn.entries(), &alloc.gamma),
        threshold,
    )
}

pub fn check_clone(
    xm: &GramMatrix,
    xn: &GramMatrix,
    alloc: &ProbabilityAllocation,
) -> Result<FeasibilityReport> {
    check_clone_with(xm, xn, alloc, tol::FEASIBILITY)
}

const BISECTION_ITERATIONS: usize = 34; // ceil(log2(1/1e-10))

/// Largest uniform success probability with a PSD slack matrix, located by
/// bisection on [0, 1] to absolute precision 1e-10.
///
/// The bisection predicate tests the PSD boundary itself (up to eigenvalue
/// dust), not the looser feasibility threshold, so the located value does not
/// drift off the true boundary. The returned allocation always classifies as
/// feasible under the reporting threshold.
pub fn max_uniform_gamma(
    xm: &GramMatrix,
    xn: Option<&GramMatrix>,
    mode: MachineMode,
) -> Result<ProbabilityAllocation> {
    let n = xm.size();
    if mode == MachineMode::Clone {
        let xn = xn.ok_or_else(|| {
            Error::InvalidInput("clone maximization needs the output Gram".into())
        })?;
        if xm.copy_power() >= xn.copy_power() {
            return Err(Error::InvalidInput(
                "clone needs more output copies than inputs".into(),
            ));
        }
    }
    let slack_min = |gamma: f64| -> Result<f64> {
        let g = vec![gamma; n];
        let slack = match mode {
            MachineMode::Identification => slack_identification(xm.entries(), &g),
            MachineMode::Clone => slack_clone(xm.entries(), xn.unwrap().entries(), &g),
        };
        Ok(hermitian_eig(&slack)?.min_eigenvalue())
    };
    let feasible = |gamma: f64| -> Result<bool> { Ok(slack_min(gamma)? >= -tol::BISECTION_PSD) };

    if feasible(1.0)? {
        return ProbabilityAllocation::uniform(1.0, n, mode);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ProbabilityAllocation::uniform(lo, n, mode)
}

/// Failure amplitudes and core spectrum for a feasible allocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralData {
    /// Hermitian PSD square root of the slack matrix.
    pub c: CMatrix,
    /// Spectrum of `I - C† (X^(M))⁻¹ C`, each in [0, 1].
    pub m: Vec<f64>,
    /// Eigenvector unitary of the same operator.
    pub v: CMatrix,
}

pub fn spectral_data(
    xm: &GramMatrix,
    alloc: &ProbabilityAllocation,
    slack: &CMatrix,
) -> Result<SpectralData> {
    let n = xm.size();
    if alloc.len() != n || slack.rows() != n {
        return Err(Error::Dimension(
            "spectral data inputs disagree in size".into(),
        ));
    }
    let c = psd_sqrt(slack)?;
    let xinv = xm.entries().pd_inverse()?;
    let k = CMatrix::identity(n)
        .sub(&c.adjoint().mul(&xinv).mul(&c))
        .hermitized();
    let e = hermitian_eig(&k)?;
    let mut m = e.eigenvalues.clone();
    for v in m.iter_mut() {
        if *v < -tol::FEASIBILITY {
            return Err(Error::Internal(format!(
                "core spectrum has negative entry {v:.3e}; infeasible allocation slipped through"
            )));
        }
        if *v > 1.0 + tol::STRUCTURAL {
            return Err(Error::Internal(format!(
                "core spectrum has entry {v} above 1"
            )));
        }
        *v = v.clamp(0.0, 1.0);
    }
    Ok(SpectralData {
        c,
        m,
        v: e.eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stateset::{gram_power, StateSet};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// |0> and (|0>+|1>)/sqrt(2): overlap 1/sqrt(2).
    fn overlap_pair() -> StateSet {
        let s = FRAC_1_SQRT_2;
        StateSet::validate(
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(s, 0.0), c(s, 0.0)]],
            1,
            None,
        )
        .unwrap()
    }

    fn ortho_pair() -> StateSet {
        StateSet::validate(
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            1,
            None,
        )
        .unwrap()
    }

    /// Eigenvalues of a Hermitian 2x2 matrix, from the quadratic formula.
    fn eig2_oracle(x: &CMatrix) -> (f64, f64) {
        let tr = x[(0, 0)].re + x[(1, 1)].re;
        let det = (x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)]).re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    #[test]
    fn identification_orthogonal_states_with_certainty() {
        let xm = ortho_pair().gram();
        let alloc = ProbabilityAllocation::uniform(1.0, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xm, &alloc).unwrap();
        assert!(rep.feasible);
        assert!(rep.slack.max_abs() < 1e-14);
        assert!(rep.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn identification_feasible_and_infeasible_points() {
        let xm = overlap_pair().gram();
        let lo = ProbabilityAllocation::uniform(0.2, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xm, &lo).unwrap();
        let (oracle_min, _) = eig2_oracle(&rep.slack);
        assert!(rep.feasible);
        assert!((rep.min_eigenvalue - oracle_min).abs() < 1e-12);
        assert!((rep.min_eigenvalue - (0.8 - FRAC_1_SQRT_2)).abs() < 1e-12);

        let hi = ProbabilityAllocation::uniform(0.5, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xm, &hi).unwrap();
        let (oracle_min, _) = eig2_oracle(&rep.slack);
        assert!(!rep.feasible);
        assert!((rep.min_eigenvalue - oracle_min).abs() < 1e-12);
        assert!(rep.min_eigenvalue < 0.0);
    }

    #[test]
    fn clone_feasibility_examples() {
        let set = overlap_pair();
        let x = set.gram();
        let xm = gram_power(&x, 1).unwrap();
        let xn = gram_power(&x, 2).unwrap();

        let ortho = ortho_pair();
        let oxm = gram_power(&ortho.gram(), 1).unwrap();
        let oxn = gram_power(&ortho.gram(), 2).unwrap();
        let full = ProbabilityAllocation::uniform(1.0, 2, MachineMode::Clone).unwrap();
        let rep = check_clone(&oxm, &oxn, &full).unwrap();
        assert!(rep.feasible);
        assert!(rep.slack.max_abs() < 1e-14);

        let mid = ProbabilityAllocation::uniform(0.5, 2, MachineMode::Clone).unwrap();
        let rep = check_clone(&xm, &xn, &mid).unwrap();
        let (oracle_min, _) = eig2_oracle(&rep.slack);
        assert!(rep.feasible);
        assert!((rep.min_eigenvalue - oracle_min).abs() < 1e-12);

        let high = ProbabilityAllocation::uniform(0.6, 2, MachineMode::Clone).unwrap();
        let rep = check_clone(&xm, &xn, &high).unwrap();
        assert!(!rep.feasible);

        assert!(check_clone(&xn, &xm, &mid).is_err());
    }

    #[test]
    fn max_uniform_identification_bound() {
        let xm = overlap_pair().gram();
        let alloc = max_uniform_gamma(&xm, None, MachineMode::Identification).unwrap();
        // Analytic two-state bound 1 - |overlap|.
        assert!((alloc.gamma[0] - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-8);
        let rep = check_identification(&xm, &alloc).unwrap();
        assert!(rep.feasible);
        let above =
            ProbabilityAllocation::uniform(alloc.gamma[0] + 1e-6, 2, MachineMode::Identification)
                .unwrap();
        assert!(!check_identification(&xm, &above).unwrap().feasible);
    }

    #[test]
    fn max_uniform_orthonormal_is_exactly_one() {
        let xm = ortho_pair().gram();
        let alloc = max_uniform_gamma(&xm, None, MachineMode::Identification).unwrap();
        assert_eq!(alloc.gamma, vec![1.0, 1.0]);
    }

    #[test]
    fn max_uniform_clone_bound() {
        let x = overlap_pair().gram();
        let xm = gram_power(&x, 1).unwrap();
        let xn = gram_power(&x, 2).unwrap();
        let alloc = max_uniform_gamma(&xm, Some(&xn), MachineMode::Clone).unwrap();
        // Analytic two-state clone bound (1-s)/(1-s^2) = 1/(1+s).
        let s = FRAC_1_SQRT_2;
        assert!((alloc.gamma[0] - (1.0 - s) / (1.0 - s * s)).abs() < 1e-8);
        assert!((alloc.gamma[0] - 0.5857864376269049).abs() < 1e-8);
    }

    #[test]
    fn max_uniform_matches_power_bound() {
        let x = overlap_pair().gram();
        for m in 1..=3u32 {
            let xm = gram_power(&x, m).unwrap();
            let alloc = max_uniform_gamma(&xm, None, MachineMode::Identification).unwrap();
            let s = FRAC_1_SQRT_2.powi(m as i32);
            assert!((alloc.gamma[0] - (1.0 - s)).abs() < 1e-8);
        }
    }

    #[test]
    fn spectral_data_examples() {
        // Orthonormal states at certainty: zero slack, unit spectrum.
        let xm = ortho_pair().gram();
        let alloc = ProbabilityAllocation::uniform(1.0, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xm, &alloc).unwrap();
        let sd = spectral_data(&xm, &alloc, &rep.slack).unwrap();
        assert!(sd.c.max_abs() < 1e-12);
        assert!(sd.m.iter().all(|m| (m - 1.0).abs() < 1e-12));
        assert!(sd.v.max_abs_diff(&CMatrix::identity(2)) < 1e-12);

        // Zero probability: C is the PSD root of the Gram itself.
        let xo = overlap_pair().gram();
        let zero = ProbabilityAllocation::uniform(0.0, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xo, &zero).unwrap();
        let sd = spectral_data(&xo, &zero, &rep.slack).unwrap();
        let c2 = sd.c.mul(&sd.c);
        assert!(c2.max_abs_diff(xo.entries()) < 1e-10);
        assert!(sd.m.iter().all(|m| *m >= 0.0));

        // Boundary allocation: rank-one slack with known PSD root.
        let gmax = 1.0 - FRAC_1_SQRT_2;
        let alloc = ProbabilityAllocation::uniform(gmax, 2, MachineMode::Identification).unwrap();
        let rep = check_identification(&xo, &alloc).unwrap();
        let sd = spectral_data(&xo, &alloc, &rep.slack).unwrap();
        // Primary oracle: squaring the root reassembles the slack.
        assert!(sd.c.mul(&sd.c).max_abs_diff(&rep.slack) < 1e-12);
        // The rank-one closed form only holds to sqrt(eigenvalue dust):
        // the slack sits on the PSD boundary, where the matrix square root
        // amplifies an eigenvalue perturbation eps to sqrt(eps).
        let expected = 2.0f64.powf(0.25) / 2.0;
        for r in 0..2 {
            for cc in 0..2 {
                assert!((sd.c[(r, cc)].re - expected).abs() < 3e-8);
                assert!(sd.c[(r, cc)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_reconstruction_identities() {
        let set = overlap_pair();
        let x = set.gram();
        for m in 1..=2u32 {
            let xm = gram_power(&x, m).unwrap();
            let alloc = max_uniform_gamma(&xm, None, MachineMode::Identification).unwrap();
            let scaled =
                ProbabilityAllocation::uniform(alloc.gamma[0] * 0.9, 2, alloc.mode).unwrap();
            let rep = check_identification(&xm, &scaled).unwrap();
            let sd = spectral_data(&xm, &scaled, &rep.slack).unwrap();
            // Gamma + C C† must reassemble the Gram power.
            let mut recon = sd.c.mul(&sd.c.adjoint());
            for i in 0..2 {
                recon[(i, i)] += c(scaled.gamma[i], 0.0);
            }
            assert!(recon.max_abs_diff(xm.entries()) < 1e-9);
            assert!(sd.m.iter().all(|v| (0.0..=1.0).contains(v)));
        }

        // Clone mode: sqrtΓ X^(N) sqrtΓ + C C† = X^(M).
        let xm = gram_power(&x, 1).unwrap();
        let xn = gram_power(&x, 2).unwrap();
        let alloc = max_uniform_gamma(&xm, Some(&xn), MachineMode::Clone).unwrap();
        let scaled = ProbabilityAllocation::uniform(alloc.gamma[0] * 0.9, 2, alloc.mode).unwrap();
        let rep = check_clone(&xm, &xn, &scaled).unwrap();
        let sd = spectral_data(&xm, &scaled, &rep.slack).unwrap();
        let n = 2;
        let scaled_xn = CMatrix::from_fn(n, n, |r, cc| {
            xn.entries()[(r, cc)] * (scaled.gamma[r].sqrt() * scaled.gamma[cc].sqrt())
        });
        let recon = sd.c.mul(&sd.c.adjoint()).add(&scaled_xn);
        assert!(recon.max_abs_diff(xm.entries()) < 1e-9);
    }

    #[test]
    fn monotone_reduction_stays_feasible() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let raw: Vec<Vec<C64>> = (0..3)
                .map(|_| {
                    (0..4)
                        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let set = match StateSet::validate(raw, 2, None) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let xm = set.gram();
            let top = max_uniform_gamma(&xm, None, MachineMode::Identification).unwrap();
            let gamma: Vec<f64> = top
                .gamma
                .iter()
                .map(|g| g * rng.gen_range(0.0..1.0))
                .collect();
            let alloc =
                ProbabilityAllocation::new(gamma.clone(), MachineMode::Identification).unwrap();
            assert!(check_identification(&xm, &alloc).unwrap().feasible);
            let reduced: Vec<f64> = gamma.iter().map(|g| g * rng.gen_range(0.0..1.0)).collect();
            let alloc2 = ProbabilityAllocation::new(reduced, MachineMode::Identification).unwrap();
            assert!(check_identification(&xm, &alloc2).unwrap().feasible);
        }
    }
}
