//! Synthesis and verification of a five-outcome two-qubit POVM as a
//! five-qubit circuit: POVM construction, unitary dilation, two-level
//! factorization, gate synthesis and state-vector simulation.

// `!(x <= tol)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decompose;
pub mod dilation;
pub mod matkernel;
pub mod pipeline;
pub mod povm;
pub mod random;
pub mod report;
pub mod sim;
pub mod synth;
pub mod tag;

pub use decompose::{ProductOrder, TwoLevelOp, TwoLevelSeq};
pub use dilation::{DilationSource, DilationUnitary};
pub use matkernel::{CMatrix, CVector, Mat2, C64};
pub use pipeline::{verify, PipelineError, Tolerances, VerifyConfig};
pub use povm::{PovmParams, PovmSet, QChoice};
pub use report::{emit_report, AuditCheck, AuditReport, ReportFormat};
pub use sim::{Histogram, SamplingRoute, Statevector};
pub use synth::{Circuit, CompileSource, Gate};
