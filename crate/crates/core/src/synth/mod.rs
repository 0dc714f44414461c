//! Circuits over qubits `0..n`, qubit 0 most significant, gates applied in
//! time order. Two-level ops are routed with Gray codes into multi-controlled
//! gates ([`synthesize_two_level`]) and then lowered to CNOT plus single-qubit
//! gates ([`lower_multicontrolled`]).

mod dense;
mod lower;

pub use dense::{apply_gate_in_place, circuit_unitary, gate_matrix, MAX_DENSE_QUBITS};
pub use lower::lower_multicontrolled;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::decompose::{
    paper_factorization, reconstruct, two_level_decompose, DecomposeError, TwoLevelOp, TwoLevelSeq,
};
use crate::dilation::{build_oracle_dilation, DilationError, TOTAL_QUBITS};
use crate::matkernel::{CMatrix, Mat2};
use crate::povm::PovmParams;

const GATE_BLOCK_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SynthError {
    #[error("gray path needs distinct endpoints below 2^{nbits}, got {i} and {j}")]
    BadEndpoints { i: usize, j: usize, nbits: usize },
    #[error("gate touches qubit {qubit} twice or outside 0..{qubits}")]
    BadQubit { qubit: usize, qubits: usize },
    #[error("gate block is not unitary (defect {defect:e})")]
    BlockNotUnitary { defect: f64 },
    #[error("dense simulation limited to {max} qubits, circuit has {qubits}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Dilation(#[from] DilationError),
}

/// A control qubit; `polarity` true fires on `|1>`, false on `|0>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    #[serde(with = "polarity_bit")]
    pub polarity: bool,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Control { qubit, polarity: true }
    }

    pub fn neg(qubit: usize) -> Self {
        Control { qubit, polarity: false }
    }
}

mod polarity_bit {
    use super::*;

    pub fn serialize<S: Serializer>(p: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("polarity must be 0 or 1, got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    Single {
        target: usize,
        matrix: Mat2,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Mcu {
        controls: Vec<Control>,
        target: usize,
        matrix: Mat2,
    },
}

impl Gate {
    pub fn target(&self) -> usize {
        match self {
            Gate::Single { target, .. } | Gate::Cnot { target, .. } | Gate::Mcu { target, .. } => {
                *target
            }
        }
    }

    /// Controls as `(qubit, polarity)`; a CNOT has one positive control.
    pub fn controls(&self) -> Vec<Control> {
        match self {
            Gate::Single { .. } => Vec::new(),
            Gate::Cnot { control, .. } => vec![Control::pos(*control)],
            Gate::Mcu { controls, .. } => controls.clone(),
        }
    }

    pub fn block(&self) -> Mat2 {
        match self {
            Gate::Single { matrix, .. } | Gate::Mcu { matrix, .. } => *matrix,
            Gate::Cnot { .. } => Mat2::X,
        }
    }

    pub fn validate(&self, qubits: usize) -> Result<(), SynthError> {
        let mut seen = vec![false; qubits];
        let touched = self.controls().into_iter().map(|c| c.qubit).chain([self.target()]);
        for q in touched {
            if q >= qubits || seen[q] {
                return Err(SynthError::BadQubit { qubit: q, qubits });
            }
            seen[q] = true;
        }
        let defect = self.block().unitarity_defect();
        if !(defect <= GATE_BLOCK_TOL) {
            return Err(SynthError::BlockNotUnitary { defect });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub single: usize,
    pub cnot: usize,
    pub mcu: usize,
    /// Gates with more than one control.
    pub multi_controlled: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Circuit { qubits, gates: Vec::new() }
    }

    pub fn with_gates(qubits: usize, gates: Vec<Gate>) -> Result<Self, SynthError> {
        let c = Circuit { qubits, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.gates.iter().try_for_each(|g| g.validate(self.qubits))
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::Single { .. } => c.single += 1,
                Gate::Cnot { .. } => c.cnot += 1,
                Gate::Mcu { controls, .. } => {
                    c.mcu += 1;
                    if controls.len() > 1 {
                        c.multi_controlled += 1;
                    }
                }
            }
        }
        c
    }

    /// One gate per line after a `qubits n` header: `u(t)` with the eight
    /// real numbers of the block, `cx c t`, or `mcu(t) c:p,...` plus block.
    pub fn to_qasm(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubits);
        let block = |m: &Mat2| {
            m.0.iter()
                .flatten()
                .map(|z| format!("{:?} {:?}", z.re, z.im))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for g in &self.gates {
            let _ = match g {
                Gate::Single { target, matrix } => writeln!(out, "u({target}) {}", block(matrix)),
                Gate::Cnot { control, target } => writeln!(out, "cx {control} {target}"),
                Gate::Mcu { controls, target, matrix } => {
                    let cs: Vec<String> = controls
                        .iter()
                        .map(|c| format!("{}:{}", c.qubit, u8::from(c.polarity)))
                        .collect();
                    writeln!(out, "mcu({target}) {} {}", cs.join(","), block(matrix))
                }
            };
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitJson<G> {
    version: u32,
    qubits: usize,
    convention: String,
    gates: G,
}

impl Serialize for Circuit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CircuitJson {
            version: 1,
            qubits: self.qubits,
            convention: "msb-first".into(),
            gates: &self.gates,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = CircuitJson::<Vec<Gate>>::deserialize(d)?;
        if raw.version != 1 || raw.convention != "msb-first" {
            return Err(D::Error::custom("unsupported circuit version or convention"));
        }
        Circuit::with_gates(raw.qubits, raw.gates).map_err(D::Error::custom)
    }
}

/// Basis path from `i` to `j` flipping one differing bit at a time, lowest
/// bit first.
pub fn gray_path(i: usize, j: usize, nbits: usize) -> Result<Vec<usize>, SynthError> {
    let limit = 1usize.checked_shl(nbits as u32).unwrap_or(0);
    if i == j || i >= limit || j >= limit {
        return Err(SynthError::BadEndpoints { i, j, nbits });
    }
    let mut path = vec![i];
    let mut cur = i;
    for bit in 0..nbits {
        let mask = 1 << bit;
        if (i ^ j) & mask != 0 {
            cur ^= mask;
            path.push(cur);
        }
    }
    Ok(path)
}

/// Qubit index of the single bit where `a` and `b` differ.
fn differing_qubit(a: usize, b: usize, nqubits: usize) -> usize {
    let diff = a ^ b;
    debug_assert!(diff.is_power_of_two());
    nqubits - 1 - diff.trailing_zeros() as usize
}

/// Controls on every qubit except `target`, matching the bits of `state`.
fn controls_matching(state: usize, target: usize, nqubits: usize) -> Vec<Control> {
    (0..nqubits)
        .filter(|&q| q != target)
        .map(|q| Control {
            qubit: q,
            polarity: (state >> (nqubits - 1 - q)) & 1 == 1,
        })
        .collect()
}

/// Circuit whose unitary is exactly `embed(op)` on `nqubits` qubits.
///
/// The amplitude at `i` is walked along the Gray path to the neighbour of `j`
/// by multi-controlled X swaps, the block is applied there as one mcu, and
/// the swaps are undone.
pub fn synthesize_two_level(op: &TwoLevelOp, nqubits: usize) -> Result<Circuit, SynthError> {
    let path = gray_path(op.i, op.j, nqubits)?;
    let swap = |a: usize, b: usize| {
        let target = differing_qubit(a, b, nqubits);
        Gate::Mcu {
            controls: controls_matching(a, target, nqubits),
            target,
            matrix: Mat2::X,
        }
    };
    let m = path.len();
    let routing: Vec<Gate> = (0..m - 2).map(|k| swap(path[k], path[k + 1])).collect();

    let near = path[m - 2];
    let target = differing_qubit(near, op.j, nqubits);
    let near_is_one = (near >> (nqubits - 1 - target)) & 1 == 1;
    let block = if near_is_one { op.block.flipped() } else { op.block };

    let mut circ = Circuit::new(nqubits);
    circ.gates.extend(routing.iter().cloned());
    circ.push(Gate::Mcu {
        controls: controls_matching(near, target, nqubits),
        target,
        matrix: block,
    });
    circ.gates.extend(routing.into_iter().rev());
    Ok(circ)
}

/// Where the two-level factors of a compiled dilation come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompileSource {
    /// Generic factorization of the completed oracle unitary.
    Oracle,
    /// The reference 43-factor product.
    PaperProduct,
}

impl CompileSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CompileSource::Oracle => "oracle",
            CompileSource::PaperProduct => "paper-product",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledDilation {
    pub source: CompileSource,
    pub circuit: Circuit,
    /// The unitary the circuit implements: the oracle or the factor product.
    pub target: CMatrix,
    pub factors: TwoLevelSeq,
    /// Counts before lowering.
    pub routed: GateCounts,
}

/// Dilation -> two-level factors -> Gray routing -> lowering. Factors are
/// emitted last-to-first so the time-ordered circuit equals the left-first
/// product.
pub fn compile_dilation(
    params: &PovmParams,
    source: CompileSource,
) -> Result<CompiledDilation, SynthError> {
    let (factors, target) = match source {
        CompileSource::Oracle => {
            let u = build_oracle_dilation(params)?.matrix;
            (two_level_decompose(&u)?, u)
        }
        CompileSource::PaperProduct => {
            let seq = paper_factorization(params);
            let u = reconstruct(&seq);
            (seq, u)
        }
    };
    let (circuit, routed) = compile_sequence(&factors, TOTAL_QUBITS)?;
    Ok(CompiledDilation {
        source,
        circuit,
        target,
        factors,
        routed,
    })
}

/// Lowered circuit for `reconstruct(seq)` plus the routed gate counts.
pub fn compile_sequence(seq: &TwoLevelSeq, nqubits: usize) -> Result<(Circuit, GateCounts), SynthError> {
    let time_order: Vec<&TwoLevelOp> = seq.ops_left_to_right().collect();
    let pieces = time_order
        .par_iter()
        .rev()
        .map(|op| {
            let routed = synthesize_two_level(op, nqubits)?;
            let counts = routed.counts();
            Ok((lower_multicontrolled(&routed), counts))
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    let mut circuit = Circuit::new(nqubits);
    let mut routed = GateCounts::default();
    for (piece, counts) in pieces {
        circuit.gates.extend(piece.gates);
        routed.single += counts.single;
        routed.cnot += counts.cnot;
        routed.mcu += counts.mcu;
        routed.multi_controlled += counts.multi_controlled;
    }
    Ok((circuit, routed))
}
