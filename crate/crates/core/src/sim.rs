//! State-vector execution of circuits, ancilla measurement and POVM sampling.
//!
//! Sampling draws one uniform number per shot from [`shot_rng`] and walks the
//! exact cumulative outcome probabilities, so histograms do not depend on
//! thread count and two routes with matching probabilities agree shot by shot.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dilation::{
    build_oracle_dilation, global_index, DilationError, ANCILLA_DIM, DIM,
    SYSTEM_DIM, SYSTEM_QUBITS, TOTAL_QUBITS, USED_ANCILLA,
};
use crate::matkernel::{CMatrix, CVector, MatError, C64};
use crate::povm::{build_povm, outcome_probabilities, PovmError, PovmParams};
use crate::random::{seeded, shot_rng};
use crate::report::sig12;
use crate::synth::{apply_gate_in_place, compile_dilation, Circuit, CompileSource, Gate, SynthError};

pub const NORM_TOL: f64 = 1e-10;
/// Largest probability an unused ancilla value may carry before sampling it
/// is an error; below this it is treated as rounding.
pub const UNREACHABLE_TOL: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SimError {
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("state has {got} amplitudes, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("circuit on {circuit} qubits cannot act on a {state}-qubit state")]
    QubitMismatch { circuit: usize, state: usize },
    #[error("sampled unused ancilla value {bits:03b} with probability {probability:e}")]
    UnreachableOutcome { bits: usize, probability: f64 },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Dilation(#[from] DilationError),
    #[error(transparent)]
    Povm(#[from] PovmError),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    nqubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn new(nqubits: usize, amps: Vec<C64>) -> Result<Self, SimError> {
        if amps.len() != 1 << nqubits {
            return Err(SimError::Dimension {
                expected: 1 << nqubits,
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(SimError::NotNormalized { norm });
        }
        Ok(Statevector { nqubits, amps })
    }

    pub fn from_vector(nqubits: usize, v: &CVector) -> Result<Self, SimError> {
        Statevector::new(nqubits, v.as_slice().to_vec())
    }

    pub fn basis(nqubits: usize, k: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << nqubits];
        amps[k] = C64::new(1.0, 0.0);
        Statevector { nqubits, amps }
    }

    /// `|system> (x) |000>` on the full register.
    pub fn with_ancillas(system: &Statevector) -> Result<Self, SimError> {
        if system.nqubits != SYSTEM_QUBITS {
            return Err(SimError::Dimension {
                expected: SYSTEM_DIM,
                got: system.amps.len(),
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); DIM];
        for (s, a) in system.amps.iter().enumerate() {
            amps[global_index(s, 0)] = *a;
        }
        Ok(Statevector { nqubits: TOTAL_QUBITS, amps })
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn to_vector(&self) -> CVector {
        CVector::new(self.amps.clone())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector, SimError> {
    gate.validate(state.nqubits)?;
    let mut next = state.clone();
    apply_gate_in_place(&mut next.amps, next.nqubits, gate);
    Ok(next)
}

pub fn run(circ: &Circuit, state: &Statevector) -> Result<Statevector, SimError> {
    if circ.qubits != state.nqubits {
        return Err(SimError::QubitMismatch {
            circuit: circ.qubits,
            state: state.nqubits,
        });
    }
    circ.validate()?;
    let mut next = state.clone();
    for g in &circ.gates {
        apply_gate_in_place(&mut next.amps, next.nqubits, g);
    }
    Ok(next)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    /// POVM outcome `1..=5`.
    pub outcome: usize,
    pub ancilla_bits: usize,
    pub probability: f64,
    pub post_state: Statevector,
}

/// Cumulative distribution over ancilla values for one 5-qubit state.
#[derive(Clone, Debug)]
pub struct AncillaDistribution {
    probs: [f64; ANCILLA_DIM],
    /// Values still eligible for sampling, with the running sum.
    cumulative: Vec<(usize, f64)>,
}

impl AncillaDistribution {
    pub fn new(state: &Statevector) -> Result<Self, SimError> {
        if state.nqubits != TOTAL_QUBITS {
            return Err(SimError::Dimension {
                expected: DIM,
                got: state.amps.len(),
            });
        }
        let norm = state.norm();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(SimError::NotNormalized { norm });
        }
        let mut probs = [0.0; ANCILLA_DIM];
        for s in 0..SYSTEM_DIM {
            for (a, p) in probs.iter_mut().enumerate() {
                *p += state.amps[global_index(s, a)].norm_sqr();
            }
        }
        let eligible: Vec<usize> = (0..ANCILLA_DIM)
            .filter(|&a| a < USED_ANCILLA || probs[a] > UNREACHABLE_TOL)
            .collect();
        let total: f64 = eligible.iter().map(|&a| probs[a]).sum();
        let mut acc = 0.0;
        let cumulative = eligible
            .into_iter()
            .map(|a| {
                acc += probs[a] / total;
                (a, acc)
            })
            .collect();
        Ok(AncillaDistribution { probs, cumulative })
    }

    pub fn probabilities(&self) -> &[f64; ANCILLA_DIM] {
        &self.probs
    }

    /// Ancilla value selected by a uniform draw in `[0, 1)`.
    pub fn select(&self, uniform: f64) -> Result<usize, SimError> {
        let bits = self
            .cumulative
            .iter()
            .find(|&&(a, c)| uniform < c && self.probs[a] > 0.0)
            .or_else(|| self.cumulative.iter().rev().find(|&&(a, _)| self.probs[a] > 0.0))
            .map(|&(a, _)| a)
            .unwrap_or(0);
        if bits >= USED_ANCILLA {
            return Err(SimError::UnreachableOutcome {
                bits,
                probability: self.probs[bits],
            });
        }
        Ok(bits)
    }
}

/// Normalized system state left after reading `bits`, with its probability;
/// `None` when that value has probability zero.
pub fn post_measurement_state(state: &Statevector, bits: usize) -> Option<(f64, Statevector)> {
    let probability: f64 = (0..SYSTEM_DIM)
        .map(|s| state.amps[global_index(s, bits)].norm_sqr())
        .sum();
    (probability > 0.0).then(|| (probability, collapse(state, bits, probability)))
}

fn collapse(state: &Statevector, bits: usize, probability: f64) -> Statevector {
    let scale = 1.0 / probability.sqrt();
    let amps = (0..SYSTEM_DIM)
        .map(|s| state.amps[global_index(s, bits)] * scale)
        .collect();
    Statevector { nqubits: SYSTEM_QUBITS, amps }
}

/// Born-rule measurement of the three ancilla qubits.
pub fn measure_ancilla(state: &Statevector, seed: u64) -> Result<MeasurementRecord, SimError> {
    let dist = AncillaDistribution::new(state)?;
    let bits = dist.select(seeded(seed).random::<f64>())?;
    let probability = dist.probs[bits];
    Ok(MeasurementRecord {
        outcome: bits + 1,
        ancilla_bits: bits,
        probability,
        post_state: collapse(state, bits, probability),
    })
}

/// How the dilation is applied when sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingRoute {
    /// Multiply by the oracle unitary.
    Matrix,
    /// Run the compiled gate circuit for the oracle.
    Circuit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub seed: u64,
    pub counts: [u64; USED_ANCILLA],
    #[serde(serialize_with = "sig12::serialize_slice")]
    pub expected: [f64; USED_ANCILLA],
}

impl Histogram {
    /// Pearson statistic over bins with nonzero expectation, with its degrees
    /// of freedom. A count in a zero-probability bin gives infinity.
    pub fn chi_squared(&self) -> (f64, usize) {
        let n = self.shots as f64;
        let mut stat = 0.0;
        let mut bins = 0usize;
        for (&c, &p) in self.counts.iter().zip(&self.expected) {
            if p > 0.0 {
                let e = n * p;
                stat += (c as f64 - e).powi(2) / e;
                bins += 1;
            } else if c > 0 {
                return (f64::INFINITY, bins.saturating_sub(1));
            }
        }
        (stat, bins.saturating_sub(1))
    }
}

/// Prepared dilation for repeated sampling.
pub struct PovmSampler {
    params: PovmParams,
    route: SamplingRoute,
    unitary: Option<CMatrix>,
    circuit: Option<Circuit>,
}

impl PovmSampler {
    pub fn new(params: &PovmParams, route: SamplingRoute) -> Result<Self, SimError> {
        let (unitary, circuit) = match route {
            SamplingRoute::Matrix => (Some(build_oracle_dilation(params)?.matrix), None),
            SamplingRoute::Circuit => {
                (None, Some(compile_dilation(params, CompileSource::Oracle)?.circuit))
            }
        };
        Ok(PovmSampler {
            params: *params,
            route,
            unitary,
            circuit,
        })
    }

    /// Circuit route with an already compiled circuit.
    pub fn with_circuit(params: &PovmParams, circuit: Circuit) -> Self {
        PovmSampler {
            params: *params,
            route: SamplingRoute::Circuit,
            unitary: None,
            circuit: Some(circuit),
        }
    }

    pub fn route(&self) -> SamplingRoute {
        self.route
    }

    /// The 5-qubit state just before the ancillas are measured.
    pub fn evolve(&self, input: &Statevector) -> Result<Statevector, SimError> {
        let full = Statevector::with_ancillas(input)?;
        match (&self.unitary, &self.circuit) {
            (Some(u), _) => Statevector::from_vector(TOTAL_QUBITS, &u.mul_vec(&full.to_vector())?),
            (None, Some(c)) => run(c, &full),
            (None, None) => unreachable!("sampler holds a unitary or a circuit"),
        }
    }

    pub fn measure(&self, input: &Statevector, seed: u64) -> Result<MeasurementRecord, SimError> {
        measure_ancilla(&self.evolve(input)?, seed)
    }

    pub fn sample(&self, input: &Statevector, shots: u64, seed: u64) -> Result<Histogram, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let expected = outcome_probabilities(&build_povm(&self.params), &input.to_vector())?.probs;
        let dist = AncillaDistribution::new(&self.evolve(input)?)?;
        let counts = (0..shots)
            .into_par_iter()
            .map(|shot| {
                let bits = dist.select(shot_rng(seed, shot).random::<f64>())?;
                let mut c = [0u64; USED_ANCILLA];
                c[bits] += 1;
                Ok::<_, SimError>(c)
            })
            .try_reduce(
                || [0u64; USED_ANCILLA],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )?;
        Ok(Histogram {
            shots,
            seed,
            counts,
            expected,
        })
    }
}

pub fn sample_povm(
    params: &PovmParams,
    input: &Statevector,
    shots: u64,
    seed: u64,
    route: SamplingRoute,
) -> Result<Histogram, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    PovmSampler::new(params, route)?.sample(input, shots, seed)
}
