use rayon::prelude::*;

use crate::matkernel::{CMatrix, Mat2, C64, ONE, ZERO};

use super::{Circuit, Control, Gate, SynthError};

pub const MAX_DENSE_QUBITS: usize = 6;

/// Applies `gate` to the `2^nqubits` amplitudes in place.
pub fn apply_gate_in_place(amps: &mut [C64], nqubits: usize, gate: &Gate) {
    let shift = |q: usize| nqubits - 1 - q;
    let tmask = 1usize << shift(gate.target());
    let (mut cmask, mut cwant) = (0usize, 0usize);
    for c in gate.controls() {
        let bit = 1usize << shift(c.qubit);
        cmask |= bit;
        if c.polarity {
            cwant |= bit;
        }
    }
    let b = gate.block().0;
    let is_x = matches!(gate, Gate::Cnot { .. });
    for idx in 0..amps.len() {
        if idx & tmask != 0 || idx & cmask != cwant {
            continue;
        }
        let hi = idx | tmask;
        let (x, y) = (amps[idx], amps[hi]);
        if is_x {
            amps[idx] = y;
            amps[hi] = x;
        } else {
            amps[idx] = b[0][0] * x + b[0][1] * y;
            amps[hi] = b[1][0] * x + b[1][1] * y;
        }
    }
}

/// Full matrix of the time-ordered gate product, built column by column.
pub fn circuit_unitary(circ: &Circuit) -> Result<CMatrix, SynthError> {
    if circ.qubits > MAX_DENSE_QUBITS {
        return Err(SynthError::TooManyQubits {
            qubits: circ.qubits,
            max: MAX_DENSE_QUBITS,
        });
    }
    circ.validate()?;
    let dim = 1usize << circ.qubits;
    let columns: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut v = vec![ZERO; dim];
            v[j] = ONE;
            for g in &circ.gates {
                apply_gate_in_place(&mut v, circ.qubits, g);
            }
            v
        })
        .collect();
    Ok(CMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
}

/// Dense matrix of one gate as `I + (projectors on controls) (x) (U - I)` on
/// the target, assembled by Kronecker products in qubit order.
pub fn gate_matrix(gate: &Gate, nqubits: usize) -> Result<CMatrix, SynthError> {
    if nqubits > MAX_DENSE_QUBITS {
        return Err(SynthError::TooManyQubits {
            qubits: nqubits,
            max: MAX_DENSE_QUBITS,
        });
    }
    gate.validate(nqubits)?;
    let controls = gate.controls();
    let find = |q: usize| controls.iter().find(|c| c.qubit == q).copied();
    let delta = {
        let u = gate.block();
        Mat2::new(u.0[0][0] - ONE, u.0[0][1], u.0[1][0], u.0[1][1] - ONE)
    };
    let mut term = CMatrix::identity(1);
    for q in 0..nqubits {
        let factor = if q == gate.target() {
            delta.to_cmatrix()
        } else if let Some(Control { polarity, .. }) = find(q) {
            if polarity {
                CMatrix::diag(&[ZERO, ONE])
            } else {
                CMatrix::diag(&[ONE, ZERO])
            }
        } else {
            CMatrix::identity(2)
        };
        term = term.kron(&factor);
    }
    Ok(&CMatrix::identity(1 << nqubits) + &term)
}
