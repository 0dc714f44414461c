//! Stage audits and the end-to-end `verify` chain.

use thiserror::Error;

use crate::decompose::{
    audit_paper_product, reconstruct, two_level_decompose, DecomposeError, TwoLevelSeq,
};
use crate::dilation::{
    audit_dilation_with, build_oracle_dilation, dilation_action, kraus_operators,
    transcribe_paper_matrix, with_ancillas, AuditConfig, DilationError, DilationUnitary, DIM,
    SYSTEM_DIM, TOTAL_QUBITS, USED_ANCILLA,
};
use crate::matkernel::{MatError, C64};
use crate::povm::{build_povm, PovmError, PovmParams, PovmSet};
use crate::random::{random_state, seeded};
use crate::report::AuditReport;
use crate::sim::{post_measurement_state, run, PovmSampler, SamplingRoute, SimError, Statevector};
use crate::synth::{circuit_unitary, compile_dilation, CompileSource, CompiledDilation, SynthError};

/// Pearson critical values at 99.9% for 1..=4 degrees of freedom.
pub const CHI2_CRITICAL_999: [f64; 4] = [10.828, 13.816, 16.266, 18.467];

/// Outcomes rarer than this are skipped by the collapse check.
const COLLAPSE_MIN_PROBABILITY: f64 = 1e-6;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Povm(#[from] PovmError),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Dilation(#[from] DilationError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-stage tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub povm: f64,
    pub dilation: f64,
    pub decompose: f64,
    /// Circuit against its target, up to global phase.
    pub synth: f64,
    /// Compiled circuit against the dilation contract.
    pub contract: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            povm: 1e-12,
            dilation: 1e-10,
            decompose: 1e-9,
            synth: 1e-8,
            contract: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            povm: tol,
            dilation: tol,
            decompose: tol,
            synth: tol,
            contract: tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub tolerances: Tolerances,
    /// Random states for contract checks.
    pub samples: usize,
    pub seed: u64,
    pub shots: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tolerances: Tolerances::default(),
            samples: 100,
            seed: 0x5eed,
            shots: 20_000,
        }
    }
}

impl VerifyConfig {
    fn audit(&self, tolerance: f64) -> AuditConfig {
        AuditConfig {
            tolerance,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

pub fn povm_audit(povm: &PovmSet, tol: f64) -> Result<AuditReport, PipelineError> {
    let mut r = AuditReport::new();
    r.check("completeness_frobenius", povm.completeness_defect(), tol);
    r.check("p5_diagonal_frobenius", povm.p5_diagonal_defect(), tol);
    let spectra = povm.spectra()?;
    let negativity = spectra
        .iter()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .fold(0.0f64, |acc, min| if min < -acc { -min } else { acc });
    r.check("eigenvalue_negativity_max", negativity, tol);
    for (k, s) in spectra.iter().enumerate() {
        let shown: Vec<String> = s.iter().map(|x| format!("{:.12}", clean(*x))).collect();
        r.note(format!("P{} eigenvalues: [{}]", k + 1, shown.join(", ")));
    }
    if povm.elements[4].max_abs() <= tol {
        r.note("P5 = 0: projective branch, outcome 5 never occurs");
    }
    Ok(r)
}

/// Prints `-0.000000000000` as zero.
fn clean(x: f64) -> f64 {
    if x.abs() < 5e-13 {
        0.0
    } else {
        x
    }
}

pub fn decompose_audit(u: &DilationUnitary, tol: f64) -> Result<(TwoLevelSeq, AuditReport), PipelineError> {
    let seq = two_level_decompose(&u.matrix)?;
    let mut r = AuditReport::new();
    r.check("round_trip_max_deviation", reconstruct(&seq).max_abs_diff(&u.matrix), tol);
    r.check("op_count_excess", seq.len().saturating_sub(DIM * (DIM - 1) / 2) as f64, 0.0);
    r.note(format!("{} two-level ops (bound {})", seq.len(), DIM * (DIM - 1) / 2));
    Ok((seq, r))
}

/// Circuit against its target, gate-set restrictions, and the contract on
/// random inputs up to one common phase.
pub fn synth_audit(
    compiled: &CompiledDilation,
    povm: &PovmSet,
    config: &VerifyConfig,
) -> Result<AuditReport, PipelineError> {
    let tol = &config.tolerances;
    let mut r = AuditReport::new();
    let circ = &compiled.circuit;
    let counts = circ.counts();
    r.note(format!(
        "{} factors, {} routed mcu gates, lowered to {} single + {} cnot",
        compiled.factors.len(),
        compiled.routed.mcu,
        counts.single,
        counts.cnot
    ));
    r.check(
        "equivalence_up_to_phase",
        circuit_unitary(circ)?.max_abs_diff_up_to_phase(&compiled.target),
        tol.synth,
    );
    r.check("multi_controlled_gates", (counts.multi_controlled + counts.mcu) as f64, 0.0);

    let kraus = kraus_operators(povm)?;
    let mut rng = seeded(config.seed);
    let mut phase: Option<C64> = None;
    let mut worst = 0.0f64;
    for _ in 0..config.samples {
        let psi = random_state(SYSTEM_DIM, &mut rng);
        let out = run(circ, &Statevector::from_vector(TOTAL_QUBITS, &with_ancillas(&psi))?)?.to_vector();
        let want = dilation_action(&kraus, &psi)?;
        let ph = *phase.get_or_insert_with(|| {
            let z = want.inner(&out);
            if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) }
        });
        worst = worst.max((&out - &want.scale(ph)).norm());
    }
    r.check("contract_residual_max", worst, tol.contract);
    Ok(r)
}

/// Histogram statistics for `input` and collapse against `sqrt(P_k)|psi>`.
pub fn sampling_audit(
    params: &PovmParams,
    circuit_sampler: &PovmSampler,
    config: &VerifyConfig,
) -> Result<AuditReport, PipelineError> {
    let mut r = AuditReport::new();
    let povm = build_povm(params);
    let kraus = kraus_operators(&povm)?;
    let matrix_sampler = PovmSampler::new(params, SamplingRoute::Matrix)?;
    let mut rng = seeded(config.seed ^ 0x51a);
    let psi = random_state(SYSTEM_DIM, &mut rng);
    let input = Statevector::from_vector(2, &psi)?;

    let by_matrix = matrix_sampler.sample(&input, config.shots, config.seed)?;
    let by_circuit = circuit_sampler.sample(&input, config.shots, config.seed)?;
    let (chi2, df) = by_matrix.chi_squared();
    let critical = CHI2_CRITICAL_999[df.clamp(1, 4) - 1];
    r.check("chi_squared_matrix_route", chi2, critical);
    let mismatch: u64 = by_matrix
        .counts
        .iter()
        .zip(&by_circuit.counts)
        .map(|(a, b)| a.abs_diff(*b))
        .sum();
    r.check("route_histogram_mismatch", mismatch as f64, 0.0);
    r.note(format!(
        "{} shots, seed {}, counts {:?}, degrees of freedom {df}",
        config.shots, config.seed, by_matrix.counts
    ));

    let evolved = circuit_sampler.evolve(&input)?;
    let mut worst = 0.0f64;
    for (k, kr) in kraus.iter().enumerate().take(USED_ANCILLA) {
        let ideal = kr.mul_vec(&psi)?;
        if ideal.norm().powi(2) <= COLLAPSE_MIN_PROBABILITY {
            continue;
        }
        match post_measurement_state(&evolved, k) {
            Some((_, post)) => {
                worst = worst.max(post.to_vector().distance_up_to_phase(&ideal.normalized()))
            }
            None => worst = f64::INFINITY,
        }
    }
    r.check("collapse_max_deviation", worst, config.tolerances.synth);
    Ok(r)
}

/// Every stage in order: POVM, oracle dilation, the reference matrix and
/// product (advisory), generic decomposition, synthesis of the oracle and of
/// the reference product, and sampling.
pub fn verify(params: &PovmParams, config: &VerifyConfig) -> Result<AuditReport, PipelineError> {
    let tol = &config.tolerances;
    let mut report = AuditReport::new();
    report.note(format!(
        "alpha={} beta={} gamma={} delta={} q={}",
        params.alpha(),
        params.beta(),
        params.gamma(),
        params.delta(),
        params.q()
    ));
    let povm = build_povm(params);
    report.absorb("povm", povm_audit(&povm, tol.povm)?);

    let oracle = build_oracle_dilation(params)?;
    report.absorb(
        "dilation",
        audit_dilation_with(&oracle, &oracle, &povm, &config.audit(tol.dilation))?,
    );
    report.absorb_advisory(
        "paper_matrix",
        audit_dilation_with(&transcribe_paper_matrix(params), &oracle, &povm, &config.audit(tol.dilation))?,
    );
    report.absorb_advisory("paper_product", audit_paper_product(params, &config.audit(tol.dilation))?);

    let (_, decomposition) = decompose_audit(&oracle, tol.decompose)?;
    report.absorb("decompose", decomposition);

    let compiled = compile_dilation(params, CompileSource::Oracle)?;
    report.absorb("synth", synth_audit(&compiled, &povm, config)?);
    let paper = compile_dilation(params, CompileSource::PaperProduct)?;
    let mut paper_report = AuditReport::new();
    paper_report.check(
        "equivalence_up_to_phase",
        circuit_unitary(&paper.circuit)?.max_abs_diff_up_to_phase(&paper.target),
        tol.synth,
    );
    report.absorb("synth_paper_product", paper_report);

    let sampler = PovmSampler::with_circuit(params, compiled.circuit);
    report.absorb("sim", sampling_audit(params, &sampler, config)?);
    Ok(report)
}
