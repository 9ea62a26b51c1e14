//! Built-in benchmark circuits.
//!
//! Two families cover the regimes the evaluation pipeline cares about:
//! a tunable-width parity rotation whose single non-Clifford gate sits in
//! the middle of a CNOT ladder, and a fixed five-qubit magic-state factory
//! round that is dense in two-qubit Clifford gates around a full layer of
//! T gates.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Multi-qubit parity rotation `exp(-i theta/2 Z x Z x ... x Z)` on `n`
/// qubits: a CNOT ladder folds the joint parity onto the last qubit, a
/// single `rz(theta)` rotates it, and the mirrored ladder unfolds it.
pub fn zzzzz_rotation_circuit(n: usize, theta: f64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "parity rotation needs at least 2 qubits, got {n}"
        )));
    }
    let mut gates = Vec::with_capacity(2 * (n - 1) + 1);
    for q in 0..n - 1 {
        gates.push(Gate::cnot(q, q + 1));
    }
    gates.push(Gate::rz(n - 1, theta));
    for q in (0..n - 1).rev() {
        gates.push(Gate::cnot(q, q + 1));
    }
    Circuit::from_gates(n, gates)
}

/// Five-qubit magic-injection benchmark: a full layer of T gates followed
/// by a dense Clifford block. The block is twenty brick layers, each with
/// two disjoint two-qubit gates plus two single-qubit basis changes, laid
/// out so that Pauli propagation through the bulk is thoroughly scrambled
/// (errors from different locations reach the output layer looking
/// generic, which is what makes combinatoric flag scoring informative).
///
/// The gate sequence is data; it is kept as literal circuit text and
/// guarded by a checksum test so accidental edits are caught. A companion
/// test regenerates it from the seeded layer generator it was drawn with.
pub const MAGIC_CIRCUIT_SOURCE: &str = "\
qubits 5

# magic injection layer
t 0
t 1
t 2
t 3
t 4

# dense Clifford scrambling block: 20 brick layers
cz 2 0
cz 3 1
h 1
s 3
cz 4 0
cz 3 2
s 1
h 3
cnot 0 2
cz 4 3
s 0
s 0
cz 4 2
s 3
cz 1 0
h 4
h 2
cnot 0 3
cnot 4 1
h 0
h 1
cz 4 1
cnot 0 3
s 0
cnot 1 3
s 4
cz 2 0
s 4
cnot 0 2
cz 4 1
h 2
cnot 4 3
s 0
h 2
cnot 3 4
cz 2 1
s 3
h 4
h 1
cnot 0 2
cnot 4 1
cnot 2 3
s 1
s 3
cz 0 3
cz 4 1
h 1
s 4
cz 3 2
cnot 4 1
s 3
s 4
cnot 2 1
h 3
cz 4 0
h 4
cz 1 0
h 4
h 0
cnot 4 2
cz 0 3
cz 1 2
s 4
s 2
cz 4 1
cnot 0 2
h 2
s 0
cnot 0 4
cz 3 2
h 4
cz 0 2
h 4
s 2
cnot 3 4
s 3
cz 4 1
cnot 3 0
s 1
s 0
";

/// Parses [`MAGIC_CIRCUIT_SOURCE`] into a circuit.
pub fn magic_distillation_circuit() -> Circuit {
    Circuit::parse(MAGIC_CIRCUIT_SOURCE).expect("embedded benchmark source parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::dense::{frobenius_distance, CMat};
    use ndarray::Array2;
    use num_complex::Complex64;
    use sha2::{Digest, Sha256};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn parity_rotation_matches_closed_form_diagonal() {
        let n = 5;
        let theta = FRAC_PI_4;
        let c = zzzzz_rotation_circuit(n, theta).unwrap();
        let u = c.to_unitary().unwrap();
        let dim = 1usize << n;
        let mut expected: CMat = Array2::zeros((dim, dim));
        for b in 0..dim {
            let parity = if (b as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            expected[[b, b]] =
                Complex64::new((theta / 2.0).cos(), -parity * (theta / 2.0).sin());
        }
        assert!(
            frobenius_distance(&u, &expected) < 1e-12,
            "ladder + rz + mirrored ladder must equal the joint parity rotation"
        );
    }

    #[test]
    fn parity_rotation_has_single_middle_rotation() {
        let c = zzzzz_rotation_circuit(4, 0.3).unwrap();
        assert_eq!(c.width(), 4);
        assert_eq!(c.two_qubit_gate_count(), 6);
        assert_eq!(c.non_clifford_count(), 1);
        let rotations: Vec<_> = c
            .iter_gates()
            .filter(|(_, g)| g.kind == GateKind::Rz)
            .collect();
        assert_eq!(rotations.len(), 1);
        assert_eq!(rotations[0].1.qubits, vec![3]);
    }

    #[test]
    fn parity_rotation_is_clifford_at_quarter_turns() {
        for k in 1..=4 {
            let c = zzzzz_rotation_circuit(3, k as f64 * FRAC_PI_2).unwrap();
            assert_eq!(c.non_clifford_count(), 0, "theta = {k} * pi/2");
        }
        let c = zzzzz_rotation_circuit(3, PI / 3.0).unwrap();
        assert_eq!(c.non_clifford_count(), 1);
    }

    #[test]
    fn parity_rotation_rejects_degenerate_width() {
        assert!(zzzzz_rotation_circuit(0, 0.1).is_err());
        assert!(zzzzz_rotation_circuit(1, 0.1).is_err());
        assert!(zzzzz_rotation_circuit(2, 0.1).is_ok());
    }

    /// The seeded layer generator the frozen block was drawn with: each
    /// brick layer shuffles the five qubits, couples two disjoint pairs,
    /// and sprinkles two single-qubit basis changes.
    fn scrambling_block(seed: u64, layers: usize) -> Vec<Gate> {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut body = Vec::new();
        for _ in 0..layers {
            let mut order: Vec<usize> = (0..5).collect();
            order.shuffle(&mut rng);
            for pair in order.chunks(2).take(2) {
                let (a, b) = (pair[0], pair[1]);
                if rng.gen_bool(0.5) {
                    body.push(Gate::cnot(a, b));
                } else {
                    body.push(Gate::cz(a, b));
                }
            }
            for _ in 0..2 {
                let q = rng.gen_range(0..5);
                if rng.gen_bool(0.5) {
                    body.push(Gate::h(q));
                } else {
                    body.push(Gate::s(q));
                }
            }
        }
        body
    }

    #[test]
    fn magic_source_equals_seeded_generator_output() {
        let mut gates: Vec<Gate> = (0..5).map(Gate::t).collect();
        gates.extend(scrambling_block(14, 20));
        let expected = Circuit::from_gates(5, gates).unwrap();
        assert_eq!(magic_distillation_circuit(), expected);
    }

    #[test]
    fn magic_structure_is_t_layer_then_dense_clifford() {
        let c = magic_distillation_circuit();
        assert_eq!(c.width(), 5);
        assert_eq!(c.non_clifford_count(), 5);
        assert_eq!(c.two_qubit_gate_count(), 40);
        let first = &c.moments()[0];
        assert_eq!(first.len(), 5, "first moment must be the full T layer");
        assert!(first.iter().all(|g| g.kind == GateKind::T));
        for m in 1..c.num_moments() {
            assert!(
                c.moments()[m].iter().all(|g| g.is_clifford()),
                "everything after the injection layer is Clifford"
            );
        }
    }

    #[test]
    fn magic_circuit_is_unitary() {
        let c = magic_distillation_circuit();
        let u = c.to_unitary().unwrap();
        let udag = u.mapv(|v| v.conj()).reversed_axes();
        let product = u.dot(&udag);
        let mut identity: CMat = Array2::zeros((32, 32));
        for i in 0..32 {
            identity[[i, i]] = Complex64::new(1.0, 0.0);
        }
        assert!(frobenius_distance(&product, &identity) < 1e-12);
    }

    #[test]
    fn magic_source_checksum_is_stable() {
        let digest = Sha256::digest(MAGIC_CIRCUIT_SOURCE.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(
            hex, "7638b79579bc99a5d53ed19a10a94d0dd7ede77c4b7973a7d3a3febd01277f23",
            "benchmark definition changed; update deliberately or revert"
        );
    }

    #[test]
    fn magic_source_round_trips_through_text_format() {
        let c = magic_distillation_circuit();
        let text = c.serialize();
        let reparsed = Circuit::parse(&text).unwrap();
        assert_eq!(reparsed, c);
    }
}
