// SPDX-License-Identifier: Apache-2.0

//! Two-level decomposition of dense unitaries.
//!
//! Any n x n unitary factors into at most n(n-1)/2 two-level unitaries (each
//! touching one coordinate pair) followed by at most n single-coordinate
//! phases. The factorization proceeds by eliminating the below-diagonal
//! entries column by column with plane rotations; identity factors are
//! elided from the output.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cmatrix::CMatrix;

/// Factor of a two-level decomposition, in application order: multiplying
/// the factors left to right reconstructs the source unitary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TwoLevelFactor {
    /// 2x2 unitary acting on coordinates (i, j), i < j, row-major.
    Rotation { i: usize, j: usize, u: [C64; 4] },
    /// Unit-modulus phase on coordinate k.
    Phase { k: usize, value: C64 },
}

impl TwoLevelFactor {
    /// Embed the factor into dimension n.
    pub fn embed(&self, n: usize) -> CMatrix {
        match self {
            TwoLevelFactor::Rotation { i, j, u } => CMatrix::two_level(n, *i, *j, *u),
            TwoLevelFactor::Phase { k, value } => {
                let mut m = CMatrix::identity(n);
                m[(*k, *k)] = *value;
                m
            }
        }
    }
}

/// Product of factors in order, embedded in dimension n.
pub fn factor_product(factors: &[TwoLevelFactor], n: usize) -> CMatrix {
    let mut acc = CMatrix::identity(n);
    for f in factors {
        acc = acc.mul(&f.embed(n));
    }
    acc
}

const ELIDE: f64 = 1e-12;

pub fn two_level_decompose(u: &CMatrix) -> Result<Vec<TwoLevelFactor>> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let unit = u.unitarity_error();
    if unit > 1e-9 {
        return Err(Error::NotUnitary { residual: unit });
    }
    let n = u.rows();
    let mut work = u.clone();
    let mut factors: Vec<TwoLevelFactor> = Vec::new();

    for t in 0..n.saturating_sub(1) {
        for l in t + 1..n {
            let y = work[(l, t)];
            if y.norm() <= ELIDE {
                work[(l, t)] = C64::new(0.0, 0.0);
                continue;
            }
            let x = work[(t, t)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            // Left rotation G zeroes work[l][t]; the emitted factor is G†.
            let g = [
                x.conj() / r,
                y.conj() / r,
                -y / r,
                x / r,
            ];
            for k in t..n {
                let a = work[(t, k)];
                let b = work[(l, k)];
                work[(t, k)] = g[0] * a + g[1] * b;
                work[(l, k)] = g[2] * a + g[3] * b;
            }
            work[(l, t)] = C64::new(0.0, 0.0);
            work[(t, t)] = C64::new(work[(t, t)].re, 0.0);
            factors.push(TwoLevelFactor::Rotation {
                i: t,
                j: l,
                u: [g[0].conj(), g[2].conj(), g[1].conj(), g[3].conj()],
            });
        }
    }
    for k in 0..n {
        let z = work[(k, k)];
        if (z - C64::new(1.0, 0.0)).norm() <= ELIDE {
            continue;
        }
        // Unitarity leaves a unit-modulus entry; normalize the dust away.
        factors.push(TwoLevelFactor::Phase {
            k,
            value: z / z.norm(),
        });
    }
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig::hermitian_eig;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Deterministic pseudo-random unitary: eigenvectors of a seeded
    /// Hermitian matrix.
    fn random_unitary(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut h = CMatrix::zeros(n, n);
        for r in 0..n {
            for cc in r..n {
                let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if r == cc {
                    h[(r, cc)] = c(z.re, 0.0);
                } else {
                    h[(r, cc)] = z;
                    h[(cc, r)] = z.conj();
                }
            }
        }
        hermitian_eig(&h).unwrap().eigenvectors
    }

    #[test]
    fn diagonal_unitary_yields_only_phases() {
        let phases = [0.3f64, 1.2, -2.0, 0.0];
        let mut d = CMatrix::identity(4);
        for (i, p) in phases.iter().enumerate() {
            d[(i, i)] = C64::from_polar(1.0, *p);
        }
        let factors = two_level_decompose(&d).unwrap();
        let rotations = factors
            .iter()
            .filter(|f| matches!(f, TwoLevelFactor::Rotation { .. }))
            .count();
        assert_eq!(rotations, 0);
        // The zero phase is elided.
        assert_eq!(factors.len(), 3);
        assert!(factor_product(&factors, 4).max_abs_diff(&d) < 1e-12);
    }

    #[test]
    fn two_by_two_base_case() {
        let u = random_unitary(2, 3);
        let factors = two_level_decompose(&u).unwrap();
        let rotations = factors
            .iter()
            .filter(|f| matches!(f, TwoLevelFactor::Rotation { .. }))
            .count();
        assert_eq!(rotations, 1);
        assert!(factors.len() <= 3);
        assert!(factor_product(&factors, 2).max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn random_eight_dim_reconstructs() {
        for seed in 0..4u64 {
            let u = random_unitary(8, seed);
            let factors = two_level_decompose(&u).unwrap();
            let rotations = factors
                .iter()
                .filter(|f| matches!(f, TwoLevelFactor::Rotation { .. }))
                .count();
            assert!(rotations <= 28);
            assert!(factors.len() <= 28 + 8);
            assert!(factor_product(&factors, 8).max_abs_diff(&u) < 1e-9);
        }
    }

    #[test]
    fn factor_order_matches_emission() {
        // Rotations must come out in (t, l) lexicographic order.
        let u = random_unitary(4, 9);
        let factors = two_level_decompose(&u).unwrap();
        let mut last = (0usize, 0usize);
        for f in &factors {
            if let TwoLevelFactor::Rotation { i, j, .. } = f {
                assert!((*i, *j) > last || last == (0, 0));
                assert!(i < j);
                last = (*i, *j);
            }
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = CMatrix::identity(3);
        m[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(
            two_level_decompose(&m),
            Err(Error::NotUnitary { .. })
        ));
    }
}
