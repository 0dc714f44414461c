//! Seeded random generators for states, matrices and unitaries.
//!
//! Every stochastic step in the crate draws from [`ChaCha8Rng`]. Sampling
//! runs use one stream per shot (see [`shot_rng`]) so that sequential and
//! parallel runs see the same numbers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matkernel::{CMatrix, CVector, C64};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for shot number `shot` of a run seeded with `seed`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with iid standard complex Gaussian entries.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed normalized state.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> CVector {
    CVector::new((0..dim).map(|_| gaussian(rng)).collect()).normalized()
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let a = random_matrix(dim, dim, rng);
    CMatrix::from_fn(dim, dim, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Haar-distributed unitary: Gram-Schmidt QR of a Gaussian matrix, which
/// leaves `R` with a positive diagonal.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_matrix(dim, dim, rng);
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut w = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let c = q.inner(&w);
                for (wi, qi) in w.as_mut_slice().iter_mut().zip(q.as_slice()) {
                    *wi -= c * qi;
                }
            }
        }
        cols.push(w.normalized());
    }
    CMatrix::from_columns(&cols)
}
