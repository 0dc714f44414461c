//! Dense complex linear algebra for the small (dim <= 64) matrices used
//! throughout the pipeline.
//!
//! Matrices are row-major. Norms are Frobenius unless a function name says
//! otherwise.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default equality tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A candidate completion vector is discarded when its norm after projection
/// falls below this.
pub const DEPENDENCE_TOL: f64 = 1e-8;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian (max |h - h^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("input columns are not orthonormal (max |V^dagger V - I| = {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("more columns ({cols}) than rows ({rows})")]
    TooManyColumns { rows: usize, cols: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
}

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn new(data: Vec<C64>) -> Self {
        assert!(!data.is_empty(), "vector dimension must be positive");
        CVector { data }
    }

    pub fn zeros(dim: usize) -> Self {
        CVector::new(vec![ZERO; dim])
    }

    /// Canonical basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut v = CVector::zeros(dim);
        v.data[k] = ONE;
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        CVector::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> CVector {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector::new(self.data.iter().map(|z| z * s).collect())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tensor product with `self` as the more significant factor.
    pub fn kron(&self, other: &CVector) -> CVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                out.push(a * b);
            }
        }
        CVector::new(out)
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean distance between `self` and `e^{i phi} other` for the phase
    /// that minimizes it.
    pub fn distance_up_to_phase(&self, other: &CVector) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        (self - &other.scale(phase)).norm()
    }

    /// `|v><v|`
    pub fn outer(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| self.data[i] * self.data[j].conj())
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim());
        CVector::new(self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim());
        CVector::new(self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect())
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Row-major data; panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "entries.len() != rows * cols");
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        CMatrix::from_vec(rows, cols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = CMatrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_columns(columns: &[CVector]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].dim();
        CMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn set_column(&mut self, j: usize, v: &CVector) {
        assert_eq!(v.dim(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix::from_vec(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `‖self - other‖_F`
    pub fn distance(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry deviation between `self` and `e^{i phi} other` after choosing
    /// `phi = arg tr(other^dagger self)`.
    pub fn max_abs_diff_up_to_phase(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        let overlap: C64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| b.conj() * a)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }

    /// `‖A^dagger A - I‖_F`
    pub fn unitarity_defect(&self) -> f64 {
        gram(self).distance(&CMatrix::identity(self.cols))
    }

    /// `max |h - h^dagger|`
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector, MatError> {
        if v.dim() != self.cols {
            return Err(MatError::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.dim(), 1),
            });
        }
        Ok(CVector::new(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// Kronecker product, `self` as the more significant factor.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r2, c2) = other.shape();
        CMatrix::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape());
        CMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape());
        CMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    /// Panics on dimension mismatch; use [`multiply`] for the fallible form.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        multiply(self, rhs).expect("matrix product dimension mismatch")
    }
}

pub fn multiply(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, MatError> {
    if a.cols != b.rows {
        return Err(MatError::DimensionMismatch {
            op: "multiply",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == ZERO {
                continue;
            }
            for (o, bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

/// `A^dagger A`
fn gram(a: &CMatrix) -> CMatrix {
    let n = a.cols;
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: C64 = (0..a.rows).map(|k| a[(k, i)].conj() * a[(k, j)]).sum();
            g[(i, j)] = s;
            g[(j, i)] = s.conj();
        }
    }
    g
}

/// Spectrum of a Hermitian matrix: ascending eigenvalues and the matching
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V f(diag(lambda)) V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigen, MatError> {
    if !h.is_square() {
        return Err(MatError::NotSquare {
            op: "eig_hermitian",
            rows: h.rows,
            cols: h.cols,
        });
    }
    let defect = h.hermiticity_defect();
    if !(defect <= DEFAULT_TOL) {
        return Err(MatError::NotHermitian { defect });
    }
    let n = h.rows;
    // symmetrize so the solver sees an exactly Hermitian input
    let m = DMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(MatError::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Extends `k` orthonormal columns of length `d` to a `d x d` unitary.
///
/// The first `k` output columns are `v` verbatim. The remaining columns come
/// from orthonormalizing `e_0, e_1, ...` in ascending order against everything
/// collected so far; a candidate whose projected norm is below
/// [`DEPENDENCE_TOL`] is skipped.
pub fn complete_columns(v: &CMatrix) -> Result<CMatrix, MatError> {
    let (d, k) = v.shape();
    if k > d {
        return Err(MatError::TooManyColumns { rows: d, cols: k });
    }
    let defect = gram(v).max_abs_diff(&CMatrix::identity(k));
    if !(defect <= DEFAULT_TOL) {
        return Err(MatError::NotOrthonormal { defect });
    }

    let mut basis: Vec<CVector> = (0..k).map(|j| v.column(j)).collect();
    for e in 0..d {
        if basis.len() == d {
            break;
        }
        let mut w = CVector::basis(d, e);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = b.inner(&w);
                for (wi, bi) in w.as_mut_slice().iter_mut().zip(b.as_slice()) {
                    *wi -= c * bi;
                }
            }
        }
        let n = w.norm();
        if n < DEPENDENCE_TOL {
            continue;
        }
        basis.push(w.scale(C64::new(1.0 / n, 0.0)));
    }
    debug_assert_eq!(basis.len(), d);
    Ok(CMatrix::from_columns(&basis))
}

/// A 2x2 complex block, the unit of every two-level and single-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    /// The symmetric reflection block `[[xi, zeta], [zeta, -xi]]`.
    pub fn reflection(xi: f64, zeta: f64) -> Self {
        Mat2::real(xi, zeta, zeta, -xi)
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::real(h, h, h, -h)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    pub fn rz(theta: f64) -> Self {
        Mat2::diag(C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0))
    }

    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Mat2::real(c, -s, s, c)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Rows and columns swapped: the same operator in the basis `(|1>, |0>)`.
    pub fn flipped(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[1][1], a[1][0]], [a[0][1], a[0][0]]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// `max |A^dagger A - I|`
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Mat2::IDENTITY)
    }

    /// A square root `V` with `V^2 = self` for a unitary `self`.
    ///
    /// Uses the Cayley-Hamilton form `V = (U + s I) / t` with `s^2 = det U` and
    /// `t^2 = tr U + 2 s`, taking the sign of `s` that maximizes `|t|`. `V` is a
    /// polynomial in `U`, so it is unitary whenever `U` is.
    pub fn sqrt_unitary(&self) -> Mat2 {
        let tr = self.trace();
        let s0 = self.det().sqrt();
        let (s, t) = [s0, -s0]
            .into_iter()
            .map(|s| (s, (tr + s * 2.0).sqrt()))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("two candidates");
        let inv_t = t.inv();
        let a = &self.0;
        Mat2([[(a[0][0] + s) * inv_t, a[0][1] * inv_t], [a[1][0] * inv_t, (a[1][1] + s) * inv_t]])
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_vec(2, 2, vec![self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]])
    }
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: [[[f64; 2]; 2]; 2] = [
            [
                [self.0[0][0].re, self.0[0][0].im],
                [self.0[0][1].re, self.0[0][1].im],
            ],
            [
                [self.0[1][0].re, self.0[1][0].im],
                [self.0[1][1].re, self.0[1][1].im],
            ],
        ];
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = <[[[f64; 2]; 2]; 2]>::deserialize(deserializer)?;
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        Ok(Mat2([
            [c(rows[0][0]), c(rows[0][1])],
            [c(rows[1][0]), c(rows[1][1])],
        ]))
    }
}

/// Serializes a matrix as nested `[[[re, im], ...], ...]` rows.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Option<CMatrix> {
    let r = rows.len();
    let c = rows.first()?.len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return None;
    }
    let data = rows
        .iter()
        .flat_map(|row| row.iter().map(|p| C64::new(p[0], p[1])))
        .collect();
    Some(CMatrix::from_vec(r, c, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_unitary, seeded};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn naive_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = ZERO;
                for k in 0..a.cols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn multiply_identity_and_pauli() {
        let mut rng = seeded(1);
        let a = random_matrix(4, 4, &mut rng);
        assert_eq!(multiply(&CMatrix::identity(4), &a).unwrap(), a);
        let xx = multiply(&pauli_x(), &pauli_x()).unwrap();
        assert_eq!(xx, CMatrix::identity(2));
    }

    #[test]
    fn multiply_matches_triple_loop() {
        let mut rng = seeded(2);
        let a = random_matrix(4, 4, &mut rng);
        let b = random_matrix(4, 4, &mut rng);
        let fast = multiply(&a, &b).unwrap();
        assert!(fast.max_abs_diff(&naive_product(&a, &b)) < 1e-13);
    }

    #[test]
    fn multiply_rejects_bad_shapes() {
        let err = multiply(&CMatrix::zeros(2, 3), &CMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, MatError::DimensionMismatch { .. }));
    }

    #[test]
    fn adjoint_conjugates_and_involutes() {
        let d = CMatrix::diag(&[c(0.0, 1.0), c(0.0, 1.0)]);
        assert_eq!(adjoint(&d), CMatrix::diag(&[c(0.0, -1.0), c(0.0, -1.0)]));
        let mut rng = seeded(3);
        let a = random_matrix(3, 5, &mut rng);
        assert_eq!(adjoint(&adjoint(&a)), a);
        let h = Mat2::hadamard().to_cmatrix();
        assert!(multiply(&h, &adjoint(&h)).unwrap().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn eig_known_spectra() {
        let e = eig_hermitian(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
        let e = eig_hermitian(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eig_hermitian(&m), Err(MatError::NotHermitian { .. })));
        assert!(matches!(
            eig_hermitian(&CMatrix::zeros(2, 3)),
            Err(MatError::NotSquare { .. })
        ));
    }

    #[test]
    fn complete_canonical_columns_gives_identity() {
        let v = CMatrix::from_fn(32, 4, |i, j| if i == j { ONE } else { ZERO });
        assert_eq!(complete_columns(&v).unwrap(), CMatrix::identity(32));
    }

    #[test]
    fn complete_rejects_repeated_column() {
        let col = CVector::basis(4, 1);
        let v = CMatrix::from_columns(&[col.clone(), col]);
        assert!(matches!(complete_columns(&v), Err(MatError::NotOrthonormal { .. })));
    }

    #[test]
    fn complete_keeps_input_columns_verbatim() {
        let mut rng = seeded(4);
        let u = random_unitary(8, &mut rng);
        let v = CMatrix::from_fn(8, 3, |i, j| u[(i, j)]);
        let full = complete_columns(&v).unwrap();
        for j in 0..3 {
            assert_eq!(full.column(j), v.column(j));
        }
        assert!(full.unitarity_defect() < 1e-12);
    }

    #[test]
    fn sqrt_unitary_squares_back() {
        let mut rng = seeded(5);
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            let m = Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
            let v = m.sqrt_unitary();
            assert!(v.mul(&v).max_abs_diff(&m) < 1e-13);
            assert!(v.unitarity_defect() < 1e-13);
        }
        for m in [Mat2::X, Mat2::IDENTITY.scale(c(-1.0, 0.0)), Mat2::real(1.0, 0.0, 0.0, -1.0)] {
            let v = m.sqrt_unitary();
            assert!(v.mul(&v).max_abs_diff(&m) < 1e-14, "{m:?}");
        }
    }

    #[test]
    fn phase_aligned_difference_ignores_global_phase() {
        let mut rng = seeded(6);
        let u = random_unitary(4, &mut rng);
        let shifted = u.scale(C64::from_polar(1.0, 1.234));
        assert!(shifted.max_abs_diff_up_to_phase(&u) < 1e-14);
        assert!(shifted.max_abs_diff(&u) > 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn multiply_is_associative(seed in any::<u64>(), n in 1usize..7, m in 1usize..7, k in 1usize..7, l in 1usize..7) {
            let mut rng = seeded(seed);
            let a = random_matrix(n, m, &mut rng);
            let b = random_matrix(m, k, &mut rng);
            let c = random_matrix(k, l, &mut rng);
            let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
            let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
            prop_assert!(left.distance(&right) < 1e-12);
        }

        #[test]
        fn eig_reconstructs(seed in any::<u64>(), n in 1usize..=32) {
            let mut rng = seeded(seed);
            let h = random_hermitian(n, &mut rng);
            let e = eig_hermitian(&h).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(e.vectors.unitarity_defect() < 1e-10);
            let rebuilt = e.map_spectrum(|x| x);
            prop_assert!(rebuilt.distance(&h) <= 1e-9);
        }

        #[test]
        fn completion_is_unitary(seed in any::<u64>(), d in 1usize..=32, frac in 0.0f64..=1.0) {
            let mut rng = seeded(seed);
            let k = (1 + ((d - 1) as f64 * frac).floor() as usize).min(d);
            let u = random_unitary(d, &mut rng);
            let full = complete_columns(&CMatrix::from_fn(d, k, |i, j| u[(i, j)])).unwrap();
            prop_assert!(full.unitarity_defect() <= 1e-10);
        }
    }
}
