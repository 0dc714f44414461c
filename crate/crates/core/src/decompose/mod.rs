//! Two-level factorizations of unitaries.
//!
//! A two-level operator acts as a 2x2 block on the plane spanned by basis
//! states `i < j` and as the identity elsewhere. A [`TwoLevelSeq`] stands for
//! the matrix product `op_1 · op_2 · ... · op_n` (left-first), or the reverse
//! when its convention says so.

mod paper;

pub use paper::{audit_paper_product, paper_factorization, paper_factors, paper_product_dilation, PaperFactor};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matkernel::{CMatrix, Mat2, C64, DEFAULT_TOL, ONE};

/// Entries below this magnitude count as already eliminated.
const ELIMINATION_TOL: f64 = 1e-15;
/// Unitarity slack for a single 2x2 block.
pub const BLOCK_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("two-level op needs i < j < {dim}, got ({i}, {j})")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },
    #[error("2x2 block is not unitary (defect {defect:e})")]
    BlockNotUnitary { defect: f64 },
    #[error("input is not a unitary matrix (defect {defect:e})")]
    NotUnitary { defect: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelOp {
    pub i: usize,
    pub j: usize,
    pub block: Mat2,
}

impl TwoLevelOp {
    pub fn new(i: usize, j: usize, block: Mat2) -> Result<Self, DecomposeError> {
        if i >= j {
            return Err(DecomposeError::IndexOutOfRange { i, j, dim: j });
        }
        let defect = block.unitarity_defect();
        if !(defect <= BLOCK_TOL) {
            return Err(DecomposeError::BlockNotUnitary { defect });
        }
        Ok(TwoLevelOp { i, j, block })
    }

    fn check_dim(&self, dim: usize) -> Result<(), DecomposeError> {
        if self.i < self.j && self.j < dim {
            Ok(())
        } else {
            Err(DecomposeError::IndexOutOfRange {
                i: self.i,
                j: self.j,
                dim,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductOrder {
    /// `op_1 · op_2 · ... · op_n`
    LeftFirst,
    /// `op_n · ... · op_1`
    Reversed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSeq {
    pub dim: usize,
    pub convention: ProductOrder,
    pub ops: Vec<TwoLevelOp>,
}

impl TwoLevelSeq {
    pub fn new(dim: usize, ops: Vec<TwoLevelOp>) -> Result<Self, DecomposeError> {
        for op in &ops {
            op.check_dim(dim)?;
        }
        Ok(TwoLevelSeq {
            dim,
            convention: ProductOrder::LeftFirst,
            ops,
        })
    }

    pub fn with_convention(mut self, convention: ProductOrder) -> Self {
        self.convention = convention;
        self
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Ops in matrix-product order, leftmost factor first.
    pub fn ops_left_to_right(&self) -> Box<dyn Iterator<Item = &TwoLevelOp> + '_> {
        match self.convention {
            ProductOrder::LeftFirst => Box::new(self.ops.iter()),
            ProductOrder::Reversed => Box::new(self.ops.iter().rev()),
        }
    }
}

/// The `dim x dim` matrix of `op`: identity except
/// `[(i,i), (i,j), (j,i), (j,j)] = [a, b, c, d]`.
pub fn embed(op: &TwoLevelOp, dim: usize) -> Result<CMatrix, DecomposeError> {
    op.check_dim(dim)?;
    let mut m = CMatrix::identity(dim);
    let b = &op.block.0;
    m[(op.i, op.i)] = b[0][0];
    m[(op.i, op.j)] = b[0][1];
    m[(op.j, op.i)] = b[1][0];
    m[(op.j, op.j)] = b[1][1];
    Ok(m)
}

/// `m <- block_(i,j) · m`
fn apply_left(m: &mut CMatrix, op: &TwoLevelOp) {
    let b = &op.block.0;
    for col in 0..m.cols() {
        let x = m[(op.i, col)];
        let y = m[(op.j, col)];
        m[(op.i, col)] = b[0][0] * x + b[0][1] * y;
        m[(op.j, col)] = b[1][0] * x + b[1][1] * y;
    }
}

/// `m <- m · block_(i,j)`
fn apply_right(m: &mut CMatrix, op: &TwoLevelOp) {
    let b = &op.block.0;
    for row in 0..m.rows() {
        let x = m[(row, op.i)];
        let y = m[(row, op.j)];
        m[(row, op.i)] = x * b[0][0] + y * b[1][0];
        m[(row, op.j)] = x * b[0][1] + y * b[1][1];
    }
}

pub fn reconstruct(seq: &TwoLevelSeq) -> CMatrix {
    let mut m = CMatrix::identity(seq.dim);
    for op in seq.ops_left_to_right() {
        apply_right(&mut m, op);
    }
    m
}

/// Factorizes a unitary into at most `d(d-1)/2` two-level ops.
///
/// Columns are processed left to right. Within column `c` the entries below
/// the diagonal are zeroed bottom-up, each by a rotation on rows `(c, r)`;
/// the rotation on `(c, c+1)` also fixes the diagonal phase to `1`, and the
/// last column pair is absorbed whole. With `G_k ... G_1 U = I` the returned
/// sequence is `G_1^dagger, ..., G_k^dagger` in left-first order.
pub fn two_level_decompose(u: &CMatrix) -> Result<TwoLevelSeq, DecomposeError> {
    if !u.is_square() {
        return Err(DecomposeError::NotUnitary {
            defect: f64::INFINITY,
        });
    }
    let defect = u.unitarity_defect();
    if !(defect <= DEFAULT_TOL) {
        return Err(DecomposeError::NotUnitary { defect });
    }
    let d = u.rows();
    let mut work = u.clone();
    let mut ops = Vec::new();
    let mut eliminate = |work: &mut CMatrix, g: TwoLevelOp| {
        apply_left(work, &g);
        ops.push(TwoLevelOp {
            i: g.i,
            j: g.j,
            block: g.block.adjoint(),
        });
    };

    for c in 0..d.saturating_sub(1) {
        if c + 2 == d {
            let b = Mat2::new(
                work[(c, c)],
                work[(c, c + 1)],
                work[(c + 1, c)],
                work[(c + 1, c + 1)],
            );
            if b.max_abs_diff(&Mat2::IDENTITY) > ELIMINATION_TOL {
                eliminate(&mut work, TwoLevelOp { i: c, j: c + 1, block: b.adjoint() });
            }
            break;
        }
        for r in (c + 1..d).rev() {
            let a = work[(c, c)];
            let b = work[(r, c)];
            let needed = if r == c + 1 {
                b.norm() > ELIMINATION_TOL || (a - ONE).norm() > ELIMINATION_TOL
            } else {
                b.norm() > ELIMINATION_TOL
            };
            if !needed {
                continue;
            }
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let inv = C64::new(1.0 / n, 0.0);
            let g = Mat2::new(a.conj() * inv, b.conj() * inv, -b * inv, a * inv);
            eliminate(&mut work, TwoLevelOp { i: c, j: r, block: g });
        }
    }
    if d == 1 && (work[(0, 0)] - ONE).norm() > ELIMINATION_TOL {
        // a 1x1 phase has no two-level form
        return Err(DecomposeError::IndexOutOfRange { i: 0, j: 0, dim: 1 });
    }
    TwoLevelSeq::new(d, ops)
}
