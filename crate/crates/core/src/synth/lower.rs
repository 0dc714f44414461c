use crate::matkernel::{Mat2, C64};

use super::{Circuit, Gate};

/// Blocks closer than this to the identity are dropped.
const IDENTITY_TOL: f64 = 1e-15;

/// Rewrites every mcu into CNOTs and single-qubit gates.
///
/// Negative controls are conjugated with X. One control uses the ZYZ
/// construction `A X B X C` with a phase on the control; `k >= 2` controls
/// recurse through `V^2 = U`:
/// `C(V)[c_k] C^{k-1}(X)[->c_k] C(V^dagger)[c_k] C^{k-1}(X)[->c_k] C^{k-1}(V)`.
pub fn lower_multicontrolled(circ: &Circuit) -> Circuit {
    let mut out = Circuit::new(circ.qubits);
    for g in &circ.gates {
        match g {
            Gate::Single { .. } | Gate::Cnot { .. } => out.push(g.clone()),
            Gate::Mcu { controls, target, matrix } => {
                let negated: Vec<usize> = controls.iter().filter(|c| !c.polarity).map(|c| c.qubit).collect();
                let flip = |out: &mut Circuit| {
                    for &q in &negated {
                        out.push(Gate::Single { target: q, matrix: Mat2::X });
                    }
                };
                flip(&mut out);
                let qubits: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                controlled(&qubits, *target, matrix, &mut out.gates);
                flip(&mut out);
            }
        }
    }
    out
}

fn is_identity(u: &Mat2) -> bool {
    u.max_abs_diff(&Mat2::IDENTITY) <= IDENTITY_TOL
}

fn single(target: usize, u: Mat2, out: &mut Vec<Gate>) {
    if !is_identity(&u) {
        out.push(Gate::Single { target, matrix: u });
    }
}

/// `U` on `target` when every qubit in `controls` is `|1>`.
fn controlled(controls: &[usize], target: usize, u: &Mat2, out: &mut Vec<Gate>) {
    if is_identity(u) {
        return;
    }
    match controls {
        [] => single(target, *u, out),
        [c] => controlled_once(*c, target, u, out),
        [rest @ .., last] => {
            let v = u.sqrt_unitary();
            controlled_once(*last, target, &v, out);
            controlled(rest, *last, &Mat2::X, out);
            controlled_once(*last, target, &v.adjoint(), out);
            controlled(rest, *last, &Mat2::X, out);
            controlled(rest, target, &v, out);
        }
    }
}

/// `U = e^{i phase} Rz(beta) Ry(gamma) Rz(delta)`.
struct Zyz {
    phase: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

fn zyz(u: &Mat2) -> Zyz {
    let phase = u.det().arg() / 2.0;
    let w = u.scale(C64::from_polar(1.0, -phase));
    let (a, b) = (w.0[0][0], w.0[1][0]);
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > IDENTITY_TOL { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > IDENTITY_TOL { 2.0 * b.arg() } else { 0.0 };
    Zyz {
        phase,
        beta: (sum + diff) / 2.0,
        gamma,
        delta: (sum - diff) / 2.0,
    }
}

fn controlled_once(control: usize, target: usize, u: &Mat2, out: &mut Vec<Gate>) {
    if is_identity(u) {
        return;
    }
    if u.max_abs_diff(&Mat2::X) <= IDENTITY_TOL {
        out.push(Gate::Cnot { control, target });
        return;
    }
    let Zyz { phase, beta, gamma, delta } = zyz(u);
    let a = Mat2::rz(beta).mul(&Mat2::ry(gamma / 2.0));
    let b = Mat2::ry(-gamma / 2.0).mul(&Mat2::rz(-(delta + beta) / 2.0));
    let c = Mat2::rz((delta - beta) / 2.0);
    single(target, c, out);
    out.push(Gate::Cnot { control, target });
    single(target, b, out);
    out.push(Gate::Cnot { control, target });
    single(target, a, out);
    single(control, Mat2::diag(C64::new(1.0, 0.0), C64::from_polar(1.0, phase)), out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::CMatrix;
    use crate::synth::Control;
    use crate::random::{random_unitary, seeded};
    use crate::synth::{circuit_unitary, gate_matrix};
    use proptest::prelude::*;

    fn block(seed: u64) -> Mat2 {
        let u = random_unitary(2, &mut seeded(seed));
        Mat2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)])
    }

    fn check(gate: Gate, n: usize) -> Circuit {
        let circ = Circuit::with_gates(n, vec![gate.clone()]).unwrap();
        let lowered = lower_multicontrolled(&circ);
        assert_eq!(lowered.counts().mcu, 0);
        let got = circuit_unitary(&lowered).unwrap();
        let want = gate_matrix(&gate, n).unwrap();
        assert!(got.max_abs_diff_up_to_phase(&want) < 1e-8, "{gate:?}");
        lowered
    }

    #[test]
    fn plain_circuits_unchanged() {
        let gates = vec![
            Gate::Single { target: 0, matrix: Mat2::hadamard() },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Single { target: 1, matrix: Mat2::IDENTITY },
        ];
        let c = Circuit::with_gates(2, gates).unwrap();
        assert_eq!(lower_multicontrolled(&c), c);
    }

    #[test]
    fn one_control_is_small() {
        for seed in 0..20 {
            let g = Gate::Mcu { controls: vec![Control::pos(1)], target: 0, matrix: block(seed) };
            let lowered = check(g, 2);
            let c = lowered.counts();
            assert!(c.cnot <= 2 && c.single <= 4, "{c:?}");
        }
    }

    #[test]
    fn one_control_is_phase_exact() {
        let g = Gate::Mcu { controls: vec![Control::pos(0)], target: 1, matrix: block(77) };
        let lowered = lower_multicontrolled(&Circuit::with_gates(2, vec![g.clone()]).unwrap());
        let got = circuit_unitary(&lowered).unwrap();
        assert!(got.max_abs_diff(&gate_matrix(&g, 2).unwrap()) < 1e-14);
    }

    #[test]
    fn c4x_permutation() {
        let g = Gate::Mcu { controls: (0..4).map(Control::pos).collect(), target: 4, matrix: Mat2::X };
        let lowered = check(g, 5);
        assert_eq!(lowered.counts().multi_controlled, 0);
        let got = circuit_unitary(&lowered).unwrap();
        let mut want = CMatrix::identity(32);
        want[(30, 30)] = C64::new(0.0, 0.0);
        want[(31, 31)] = C64::new(0.0, 0.0);
        want[(30, 31)] = C64::new(1.0, 0.0);
        want[(31, 30)] = C64::new(1.0, 0.0);
        assert!(got.max_abs_diff_up_to_phase(&want) < 1e-8);
    }

    #[test]
    fn diagonal_and_antidiagonal_blocks() {
        let i = C64::new(0.0, 1.0);
        for u in [
            Mat2::diag(i, -i),
            Mat2::new(C64::new(0.0, 0.0), i, i, C64::new(0.0, 0.0)),
            Mat2::real(-1.0, 0.0, 0.0, -1.0),
            Mat2::reflection(0.6, 0.8),
        ] {
            check(Gate::Mcu { controls: vec![Control::neg(2)], target: 0, matrix: u }, 3);
            check(Gate::Mcu { controls: vec![Control::pos(0), Control::neg(2)], target: 1, matrix: u }, 3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_mcu_lowering(seed in any::<u64>(), mask in 0u8..16, target in 0usize..5, k in 1usize..=4) {
            let others: Vec<usize> = (0..5).filter(|&q| q != target).take(k).collect();
            let controls = others
                .iter()
                .enumerate()
                .map(|(n, &q)| Control { qubit: q, polarity: mask >> n & 1 == 1 })
                .collect();
            let lowered = check(Gate::Mcu { controls, target, matrix: block(seed) }, 5);
            prop_assert_eq!(lowered.counts().multi_controlled, 0);
        }
    }
}
