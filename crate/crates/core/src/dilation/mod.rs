//! Unitary dilation of the POVM onto two system qubits plus three ancillas.
//!
//! A dilation `U` must satisfy, for every two-qubit `|psi>`,
//!
//! ```text
//! U |psi>|000> = sum_k sqrt(P_k)|psi> |anc_k>,   anc = 000, 001, 010, 011, 100
//! ```
//!
//! which pins down the four columns `|j>|000>` and nothing else. Three routes
//! produce candidates: completion of those columns ([`build_oracle_dilation`]),
//! the reference explicit matrix ([`transcribe_paper_matrix`]) and the
//! reference two-level product ([`crate::decompose::paper_product_dilation`]).
//!
//! Basis convention: global index `= 8 * system + ancilla`, with the system
//! qubits most significant.

mod audit;
mod paper_matrix;

pub use audit::{audit_dilation, audit_dilation_with, AuditConfig};
pub use paper_matrix::{paper_entry_tags, transcribe_paper_matrix, PAPER_BLOCKS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matkernel::{complete_columns, eig_hermitian, CMatrix, CVector, MatError, DEFAULT_TOL};
use crate::povm::{build_povm, PovmParams, PovmSet};
use crate::tag::EntryTag;

pub const SYSTEM_QUBITS: usize = 2;
pub const ANCILLA_QUBITS: usize = 3;
pub const TOTAL_QUBITS: usize = SYSTEM_QUBITS + ANCILLA_QUBITS;
pub const SYSTEM_DIM: usize = 1 << SYSTEM_QUBITS;
pub const ANCILLA_DIM: usize = 1 << ANCILLA_QUBITS;
pub const DIM: usize = 1 << TOTAL_QUBITS;
/// Ancilla values `000..100` carry the five outcomes.
pub const USED_ANCILLA: usize = 5;
/// Global indices of `|j>|000>`.
pub const CONSTRAINED_COLUMNS: [usize; 4] = [0, 8, 16, 24];

/// Eigenvalues with magnitude below this are rounding noise and map to an
/// exact zero before taking square roots.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-14;

pub const fn global_index(system: usize, ancilla: usize) -> usize {
    system * ANCILLA_DIM + ancilla
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DilationError {
    #[error("POVM element is indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },
    #[error("oracle dilation is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("audit inputs were built from different parameters")]
    ParamsMismatch,
    #[error("expected a {expected}-dimensional vector, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationSource {
    Oracle,
    PaperMatrix,
    PaperProduct,
}

impl DilationSource {
    pub fn as_str(self) -> &'static str {
        match self {
            DilationSource::Oracle => "oracle",
            DilationSource::PaperMatrix => "paper-matrix",
            DilationSource::PaperProduct => "paper-product",
        }
    }
}

/// A 32x32 candidate dilation and where it came from.
#[derive(Clone, Debug)]
pub struct DilationUnitary {
    pub matrix: CMatrix,
    pub source: DilationSource,
    pub params: PovmParams,
    /// Symbolic entry tags, row-major; present for the transcribed matrix.
    pub tags: Option<Vec<EntryTag>>,
}

impl DilationUnitary {
    pub fn tag(&self, row: usize, col: usize) -> Option<&EntryTag> {
        self.tags.as_ref().map(|t| &t[row * DIM + col])
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }
}

/// Hermitian PSD square root via eigendecomposition.
pub fn sqrt_povm_element(p: &CMatrix) -> Result<CMatrix, DilationError> {
    let eig = eig_hermitian(p)?;
    let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    if min_eigenvalue < -DEFAULT_TOL {
        return Err(DilationError::Indefinite { min_eigenvalue });
    }
    Ok(eig.map_spectrum(|x| if x.abs() <= ZERO_EIGENVALUE_TOL { 0.0 } else { x.max(0.0).sqrt() }))
}

/// `sqrt(P_1) .. sqrt(P_5)`.
pub fn kraus_operators(povm: &PovmSet) -> Result<[CMatrix; 5], DilationError> {
    let mut out: [CMatrix; 5] = std::array::from_fn(|_| CMatrix::zeros(1, 1));
    for (slot, p) in out.iter_mut().zip(&povm.elements) {
        *slot = sqrt_povm_element(p)?;
    }
    Ok(out)
}

/// Right-hand side of the dilation contract: `sum_k K_k|psi> (x) |anc_k>`.
pub fn dilation_action(kraus: &[CMatrix; 5], psi: &CVector) -> Result<CVector, DilationError> {
    if psi.dim() != SYSTEM_DIM {
        return Err(DilationError::Dimension {
            expected: SYSTEM_DIM,
            got: psi.dim(),
        });
    }
    let mut out = CVector::zeros(DIM);
    for (anc, k) in kraus.iter().enumerate() {
        let branch = k.mul_vec(psi)?;
        for s in 0..SYSTEM_DIM {
            out[global_index(s, anc)] = branch[s];
        }
    }
    Ok(out)
}

/// `|psi> (x) |000>` on the full register.
pub fn with_ancillas(psi: &CVector) -> CVector {
    psi.kron(&CVector::basis(ANCILLA_DIM, 0))
}

/// The four columns `U|j>|000>` forced by the contract, as a 32x4 matrix.
pub fn constrained_columns(params: &PovmParams) -> Result<CMatrix, DilationError> {
    let kraus = kraus_operators(&build_povm(params))?;
    let cols = (0..SYSTEM_DIM)
        .map(|j| dilation_action(&kraus, &CVector::basis(SYSTEM_DIM, j)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CMatrix::from_columns(&cols))
}

/// Constrained columns at `|j>|000>`; the other 28 positions, in ascending
/// order, receive the canonical-basis completion from
/// [`complete_columns`].
pub fn build_oracle_dilation(params: &PovmParams) -> Result<DilationUnitary, DilationError> {
    let fixed = constrained_columns(params)?;
    let completed = complete_columns(&fixed)?;
    let mut matrix = CMatrix::zeros(DIM, DIM);
    let mut extra = CONSTRAINED_COLUMNS.len()..DIM;
    for col in 0..DIM {
        let source = match CONSTRAINED_COLUMNS.iter().position(|&c| c == col) {
            Some(j) => j,
            None => extra.next().expect("28 completion columns"),
        };
        matrix.set_column(col, &completed.column(source));
    }
    let defect = matrix.unitarity_defect();
    if !(defect <= DEFAULT_TOL) {
        return Err(DilationError::NotUnitary { defect });
    }
    Ok(DilationUnitary {
        matrix,
        source: DilationSource::Oracle,
        params: *params,
        tags: None,
    })
}
