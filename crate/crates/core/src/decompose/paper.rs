//! The reference 43-factor two-level product for the dilation.
//!
//! Every factor is a real reflection `[[xi, zeta], [zeta, -xi]]` on a pair of
//! 1-based basis indices. The first 24 factors build the four copies of the
//! 4x4 orthogonal block that mixes the four signed states; the remaining 19
//! route amplitude between system blocks and into the `100` ancilla.

use crate::dilation::{
    audit_dilation_with, build_oracle_dilation, transcribe_paper_matrix, AuditConfig,
    DilationError, DilationSource, DilationUnitary, DIM,
};
use crate::matkernel::Mat2;
use crate::povm::{build_povm, PovmParams};
use crate::report::AuditReport;
use crate::tag::EntryTag;

use super::{reconstruct, ProductOrder, TwoLevelOp, TwoLevelSeq, BLOCK_TOL};

/// One symbolic factor: reflection with entries `xi`, `zeta` on the 1-based
/// pair `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaperFactor {
    pub i: usize,
    pub j: usize,
    pub xi: EntryTag,
    pub zeta: EntryTag,
}

const MIXER: [(usize, usize, &str, &str); 6] = [
    (1, 2, "1/√2", "1/√2"),
    (1, 3, "√(2/3)", "1/√3"),
    (1, 4, "√3/2", "1/2"),
    (2, 4, "0", "1"),
    (2, 3, "√(1/3)", "√2/√3"),
    (3, 4, "1/√2", "1/√2"),
];

const ROUTING: [(usize, usize, &str, &str); 19] = [
    (1, 10, "α/s", "-β/s"),
    (2, 27, "α/y", "-δ/y"),
    (3, 12, "α/s", "β/s"),
    (4, 25, "α/y", "δ/y"),
    (9, 20, "β/z", "γ/z"),
    (11, 18, "β/z", "-γ/z"),
    (17, 26, "γ/t", "-δ/t"),
    (19, 28, "γ/t", "δ/t"),
    (10, 28, "-t/γδ", "-s/αβ"),
    (12, 26, "-t/γδ", "-s/αβ"),
    (18, 25, "y/αδ", "-z/βγ"),
    (20, 27, "y/αδ", "z/βγ"),
    (5, 28, "-2q/α", "u"),
    (13, 27, "-2q/β", "v"),
    (21, 26, "w", "-2q/γ"),
    (25, 29, "2q/δ", "p"),
    (1, 28, "0", "1"),
    (9, 27, "0", "1"),
    (17, 21, "0", "1"),
];

fn factor(i: usize, j: usize, xi: &str, zeta: &str) -> PaperFactor {
    PaperFactor {
        i,
        j,
        xi: EntryTag::parse(xi).expect("factor tag parses"),
        zeta: EntryTag::parse(zeta).expect("factor tag parses"),
    }
}

/// All 43 factors in left-first order.
pub fn paper_factors() -> Vec<PaperFactor> {
    let mut out = Vec::with_capacity(43);
    for offset in [0, 8, 16, 24] {
        for &(i, j, xi, zeta) in &MIXER {
            out.push(factor(i + offset, j + offset, xi, zeta));
        }
    }
    out.extend(ROUTING.iter().map(|&(i, j, xi, zeta)| factor(i, j, xi, zeta)));
    out
}

impl PaperFactor {
    pub fn block(&self, params: &PovmParams) -> Mat2 {
        Mat2::reflection(self.xi.eval(params), self.zeta.eval(params))
    }

    /// Orthogonality defect `|xi^2 + zeta^2 - 1|`.
    pub fn defect(&self, params: &PovmParams) -> f64 {
        let (x, z) = (self.xi.eval(params), self.zeta.eval(params));
        (x * x + z * z - 1.0).abs()
    }

    fn to_op(&self, params: &PovmParams) -> TwoLevelOp {
        TwoLevelOp {
            i: self.i - 1,
            j: self.j - 1,
            block: self.block(params),
        }
    }
}

/// The factorization evaluated at `params`, 0-based, left-first.
pub fn paper_factorization(params: &PovmParams) -> TwoLevelSeq {
    let ops = paper_factors().iter().map(|f| f.to_op(params)).collect();
    TwoLevelSeq {
        dim: DIM,
        convention: ProductOrder::LeftFirst,
        ops,
    }
}

pub fn paper_product_dilation(params: &PovmParams, order: ProductOrder) -> DilationUnitary {
    let seq = paper_factorization(params).with_convention(order);
    DilationUnitary {
        matrix: reconstruct(&seq),
        source: DilationSource::PaperProduct,
        params: *params,
        tags: None,
    }
}

/// Per-factor orthogonality, the product against the contract and the oracle,
/// and its distance to the transcribed matrix. The reversed product is a
/// diagnostic and only reported as advisory.
pub fn audit_paper_product(
    params: &PovmParams,
    config: &AuditConfig,
) -> Result<AuditReport, DilationError> {
    let tol = config.tolerance;
    let mut report = AuditReport::new();
    let factors = paper_factors();
    report.note(format!("{} two-level factors, left-first product", factors.len()));

    let mut worst = 0.0f64;
    for f in &factors {
        let d = f.defect(params);
        worst = worst.max(d);
        let verdict = if d <= BLOCK_TOL { "ok" } else { "NOT ORTHOGONAL" };
        report.note(format!(
            "factor ({}, {}) xi '{}'={:.12} zeta '{}'={:.12} defect {:.3e} {verdict}",
            f.i,
            f.j,
            f.xi,
            f.xi.eval(params),
            f.zeta,
            f.zeta.eval(params),
            d
        ));
    }
    report.check("factor_orthogonality_max", worst, tol);

    let povm = build_povm(params);
    let oracle = build_oracle_dilation(params)?;
    let product = paper_product_dilation(params, ProductOrder::LeftFirst);
    report.check("product_unitarity_defect", product.unitarity_defect(), tol);
    report.absorb(
        "left_first",
        audit_dilation_with(&product, &oracle, &povm, config)?,
    );

    let matrix = transcribe_paper_matrix(params);
    report.advisory(
        "matrix_full_max_deviation",
        product.matrix.max_abs_diff(&matrix.matrix),
        tol,
    );

    let reversed = paper_product_dilation(params, ProductOrder::Reversed);
    report.absorb_advisory(
        "reversed",
        audit_dilation_with(&reversed, &oracle, &povm, config)?,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{audit_dilation, CONSTRAINED_COLUMNS};
    use crate::povm::QChoice;

    fn set_a() -> PovmParams {
        PovmParams::new(2.0, 2.0, 2.0, 2.0, 1.0).unwrap()
    }

    fn set_b() -> PovmParams {
        PovmParams::from_inverse_squares([0.5, 0.25, 0.125, 0.125], QChoice::Optimal).unwrap()
    }

    #[test]
    fn forty_three_valid_factors() {
        let factors = paper_factors();
        assert_eq!(factors.len(), 43);
        for params in [set_a(), set_b()] {
            let seq = paper_factorization(&params);
            assert_eq!(seq.ops.len(), 43);
            for (f, op) in factors.iter().zip(&seq.ops) {
                assert!(op.i < op.j && op.j < DIM);
                assert!(f.defect(&params) < 1e-14, "{f:?}");
                assert!(op.block.unitarity_defect() < 1e-14);
            }
        }
    }

    #[test]
    fn mixer_copies_sit_on_system_blocks() {
        let factors = paper_factors();
        for (k, offset) in [0, 8, 16, 24].into_iter().enumerate() {
            for f in &factors[6 * k..6 * k + 6] {
                assert!(f.i > offset && f.j <= offset + 4);
            }
        }
    }

    #[test]
    fn left_first_product_matches_contract() {
        for params in [set_a(), set_b()] {
            let oracle = build_oracle_dilation(&params).unwrap();
            let product = paper_product_dilation(&params, ProductOrder::LeftFirst);
            let report = audit_dilation(&product, &oracle, &build_povm(&params)).unwrap();
            assert!(report.passed(), "{report:?}");
            for &c in &CONSTRAINED_COLUMNS {
                assert!(product.matrix.column(c).max_abs_diff(&oracle.matrix.column(c)) < 1e-12);
            }
        }
    }

    #[test]
    fn reversed_product_breaks_contract() {
        let params = set_b();
        let oracle = build_oracle_dilation(&params).unwrap();
        let reversed = paper_product_dilation(&params, ProductOrder::Reversed);
        assert!(reversed.unitarity_defect() < 1e-12);
        let report = audit_dilation(&reversed, &oracle, &build_povm(&params)).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn audit_is_complete_and_ordered() {
        let report = audit_paper_product(&set_b(), &AuditConfig::default()).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.get("factor_orthogonality_max").is_some());
        assert!(report.get("left_first.contract_residual_max").is_some());
        let rev = report.get("reversed.contract_residual_max").unwrap();
        assert!(rev.advisory && !rev.pass);
    }
}
