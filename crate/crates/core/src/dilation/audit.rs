use crate::matkernel::{CVector, DEFAULT_TOL};
use crate::povm::PovmSet;
use crate::random::{random_state, seeded};
use crate::report::AuditReport;

use super::{
    dilation_action, kraus_operators, with_ancillas, DilationError, DilationUnitary,
    CONSTRAINED_COLUMNS, DIM, SYSTEM_DIM,
};

/// Cap on per-entry findings listed in the notes.
const MAX_ENTRY_NOTES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditConfig {
    pub tolerance: f64,
    /// Random inputs used for the contract residual.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            tolerance: DEFAULT_TOL,
            samples: 100,
            seed: 0x5eed,
        }
    }
}

pub fn audit_dilation(
    candidate: &DilationUnitary,
    reference: &DilationUnitary,
    povm: &PovmSet,
) -> Result<AuditReport, DilationError> {
    audit_dilation_with(candidate, reference, povm, &AuditConfig::default())
}

/// Cross-checks `candidate` against the dilation contract and against
/// `reference` on the constrained columns. Full-matrix agreement is reported
/// as advisory only, since completions are not unique.
pub fn audit_dilation_with(
    candidate: &DilationUnitary,
    reference: &DilationUnitary,
    povm: &PovmSet,
    config: &AuditConfig,
) -> Result<AuditReport, DilationError> {
    if candidate.params != reference.params || candidate.params != povm.params {
        return Err(DilationError::ParamsMismatch);
    }
    let tol = config.tolerance;
    let u = &candidate.matrix;
    let kraus = kraus_operators(povm)?;
    let mut report = AuditReport::new();
    report.note(format!(
        "candidate source: {}, reference source: {}",
        candidate.source.as_str(),
        reference.source.as_str()
    ));

    report.check("unitarity_defect", u.unitarity_defect(), tol);

    // constrained columns against sum_k sqrt(P_k)|j> (x) |anc_k>
    let mut worst_entry = (0usize, CONSTRAINED_COLUMNS[0], -1.0f64);
    let mut suspects = Vec::new();
    for (j, &col) in CONSTRAINED_COLUMNS.iter().enumerate() {
        let expected = dilation_action(&kraus, &CVector::basis(SYSTEM_DIM, j))?;
        for row in 0..DIM {
            let dev = (u[(row, col)] - expected[row]).norm();
            if dev > worst_entry.2 {
                worst_entry = (row, col, dev);
            }
            if dev > tol {
                suspects.push((row, col, dev));
            }
        }
    }
    report.check("constrained_columns_max_deviation", worst_entry.2, tol);

    let mut rng = seeded(config.seed);
    let mut contract = 0.0f64;
    for _ in 0..config.samples {
        let psi = random_state(SYSTEM_DIM, &mut rng);
        let lhs = u.mul_vec(&with_ancillas(&psi))?;
        let rhs = dilation_action(&kraus, &psi)?;
        contract = contract.max((&lhs - &rhs).norm());
    }
    report.check("contract_residual_max", contract, tol);

    let reference_dev = CONSTRAINED_COLUMNS
        .iter()
        .flat_map(|&c| (0..DIM).map(move |r| (r, c)))
        .map(|idx| (u[idx] - reference.matrix[idx]).norm())
        .fold(0.0, f64::max);
    report.check("reference_constrained_max_deviation", reference_dev, tol);
    report.advisory(
        "full_matrix_max_deviation",
        u.max_abs_diff(&reference.matrix),
        tol,
    );

    if povm.elements[4].max_abs() <= tol {
        report.note("P5 = 0: the measurement is projective and ancilla 100 is never populated");
    }

    if candidate.tags.is_some() {
        entry_findings(candidate, worst_entry, &suspects, tol, &mut report);
    }
    Ok(report)
}

/// Per-entry notes for tagged candidates: the worst constrained entry, every
/// constrained entry off by more than `tol`, and the tags in the columns with
/// the largest orthonormality defect.
fn entry_findings(
    candidate: &DilationUnitary,
    worst: (usize, usize, f64),
    suspects: &[(usize, usize, f64)],
    tol: f64,
    report: &mut AuditReport,
) {
    let tag = |r: usize, c: usize| {
        candidate
            .tag(r, c)
            .map(|t| t.to_string())
            .unwrap_or_default()
    };
    let nonzero_tags = candidate
        .tags
        .as_ref()
        .map(|t| t.iter().filter(|t| !t.is_zero()).count())
        .unwrap_or(0);
    report.note(format!("{nonzero_tags} nonzero tagged entries evaluated"));
    report.note(format!(
        "worst constrained entry ({}, {}) tag '{}' deviation {:.3e}",
        worst.0 + 1,
        worst.1 + 1,
        tag(worst.0, worst.1),
        worst.2
    ));
    let u = &candidate.matrix;
    for &col in &CONSTRAINED_COLUMNS {
        let entries: Vec<String> = (0..DIM)
            .filter(|&r| candidate.tag(r, col).is_some_and(|t| !t.is_zero()))
            .map(|r| format!("({}, {})='{}'={:.12}", r + 1, col + 1, tag(r, col), u[(r, col)].re))
            .collect();
        report.note(format!("column {} entries: {}", col + 1, entries.join(" ")));
    }
    for &(r, c, dev) in suspects.iter().take(MAX_ENTRY_NOTES) {
        report.note(format!(
            "suspect entry ({}, {}) tag '{}' deviates from the contract by {:.3e}",
            r + 1,
            c + 1,
            tag(r, c),
            dev
        ));
    }

    // column-wise orthonormality: which columns carry the defect
    let cols: Vec<CVector> = (0..DIM).map(|c| u.column(c)).collect();
    let mut worst_pair = (0usize, 0usize, 0.0f64);
    for a in 0..DIM {
        for b in a..DIM {
            let g = cols[a].inner(&cols[b]);
            let dev = if a == b { (g.re - 1.0).abs().max(g.im.abs()) } else { g.norm() };
            if dev > worst_pair.2 {
                worst_pair = (a, b, dev);
            }
        }
    }
    report.note(format!(
        "worst column pair ({}, {}) inner-product defect {:.3e}",
        worst_pair.0 + 1,
        worst_pair.1 + 1,
        worst_pair.2
    ));
    if worst_pair.2 > tol {
        for &c in &[worst_pair.0, worst_pair.1] {
            let tags: Vec<String> = (0..DIM)
                .filter(|&r| candidate.tag(r, c).is_some_and(|t| !t.is_zero()))
                .map(|r| format!("({}, {})='{}'", r + 1, c + 1, tag(r, c)))
                .collect();
            report.note(format!("column {} tags: {}", c + 1, tags.join(" ")));
        }
    }
}
