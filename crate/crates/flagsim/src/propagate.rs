//! Sign-exact Pauli propagation through circuits.
//!
//! Conjugation `g P g^dagger` is computed by decomposing `P` into X- and
//! Z-type generators, replacing each generator on the gate's qubits by its
//! known image, and multiplying the images back together with quarter-phase
//! bookkeeping. Rotation gates at multiples of pi/2 are handled uniformly
//! through their Pauli axis. Non-Clifford gates block propagation unless
//! the operator restricted to the gate's qubits is the identity or exactly
//! the gate's rotation axis (either sign), in which case the operator
//! passes through unchanged.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, XzForm};

/// Result of moving a Pauli operator across a span of moments.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    /// The operator at the far boundary.
    pub pauli: PauliString,
    /// The operator at every moment boundary crossed, input first. Length is
    /// one more than the number of moments traversed.
    pub layer_trace: Vec<PauliString>,
}

/// First offending gate found by a compatibility scan.
#[derive(Debug, Clone)]
pub struct CompatibilityViolation {
    pub moment: usize,
    pub qubit: usize,
    pub gate: Gate,
}

/// Outcome of [`check_compatibility`].
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub violation: Option<CompatibilityViolation>,
}

/// Conjugates a signed Pauli through a single Clifford gate: returns
/// `g P g^dagger`. Errors with [`Error::NotClifford`] otherwise.
pub fn conjugate_through_gate(p: &PauliString, g: &Gate) -> Result<PauliString> {
    if !g.is_clifford() {
        return Err(Error::NotClifford(g.to_string()));
    }
    for &q in &g.qubits {
        if q >= p.num_qubits() {
            return Err(Error::DimensionMismatch(p.num_qubits(), q + 1));
        }
    }
    Ok(conjugate_clifford(p, g))
}

/// Core conjugation; `g` must be Clifford and in range.
fn conjugate_clifford(p: &PauliString, g: &Gate) -> PauliString {
    let n = p.num_qubits();
    let gmask: u64 = g.qubits.iter().fold(0, |m, &q| m | (1u64 << q));
    if p.support_mask() & gmask == 0 {
        // Gate acts outside the operator's support.
        return *p;
    }
    // Start from P with the gate-qubit letters factored out; the full
    // XZ-form phase stays with the accumulator.
    let full = XzForm::from_signed(p);
    let mut acc = XzForm {
        phase: full.phase,
        x: full.x & !gmask,
        z: full.z & !gmask,
    };
    // Multiply images of the X-type generators, then the Z-type generators,
    // matching the canonical X^x Z^z factor order.
    for &q in &g.qubits {
        if full.x >> q & 1 == 1 {
            acc = acc.mul(&generator_image(g, q, true, n));
        }
    }
    for &q in &g.qubits {
        if full.z >> q & 1 == 1 {
            acc = acc.mul(&generator_image(g, q, false, n));
        }
    }
    acc.into_signed(n)
}

/// The image `g G g^dagger` of a single generator `G` (X_q or Z_q), as an
/// XZ-form operator supported on the gate's qubits.
fn generator_image(g: &Gate, q: usize, x_type: bool, n: usize) -> XzForm {
    let bit = 1u64 << q;
    let letters = |phase: u8, x: u64, z: u64| XzForm::from_letter_form(phase, x, z);
    match g.kind {
        GateKind::H => {
            if x_type {
                letters(0, 0, bit) // X -> Z
            } else {
                letters(0, bit, 0) // Z -> X
            }
        }
        GateKind::S => {
            if x_type {
                letters(0, bit, bit) // X -> Y
            } else {
                letters(0, 0, bit) // Z -> Z
            }
        }
        GateKind::Sdg => {
            if x_type {
                letters(2, bit, bit) // X -> -Y
            } else {
                letters(0, 0, bit)
            }
        }
        GateKind::X => {
            if x_type {
                letters(0, bit, 0)
            } else {
                letters(2, 0, bit) // Z -> -Z
            }
        }
        GateKind::Y => {
            if x_type {
                letters(2, bit, 0) // X -> -X
            } else {
                letters(2, 0, bit) // Z -> -Z
            }
        }
        GateKind::Z => {
            if x_type {
                letters(2, bit, 0) // X -> -X
            } else {
                letters(0, 0, bit)
            }
        }
        GateKind::Cnot => {
            let c = 1u64 << g.qubits[0];
            let t = 1u64 << g.qubits[1];
            match (x_type, bit == c) {
                (true, true) => letters(0, c | t, 0),  // X_c -> X_c X_t
                (true, false) => letters(0, t, 0),     // X_t -> X_t
                (false, true) => letters(0, 0, c),     // Z_c -> Z_c
                (false, false) => letters(0, 0, c | t) // Z_t -> Z_c Z_t
            }
        }
        GateKind::Cz => {
            let a = 1u64 << g.qubits[0];
            let b = 1u64 << g.qubits[1];
            if x_type {
                let other = if bit == a { b } else { a };
                letters(0, bit, other) // X_a -> X_a Z_b
            } else {
                letters(0, 0, bit)
            }
        }
        GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Xx => {
            let k = g
                .clifford_quarter_turns()
                .expect("caller checked Clifford")
                .rem_euclid(4) as u8;
            let axis = g
                .rotation_axis(n)
                .expect("rotation gates have a Pauli axis");
            let gen = if x_type {
                XzForm::from_letter_form(0, bit, 0)
            } else {
                XzForm::from_letter_form(0, 0, bit)
            };
            rotate_generator(&axis, &gen, k)
        }
        GateKind::T | GateKind::Tdg => unreachable!("not Clifford"),
    }
}

/// Image of `gen` under `exp(-i k pi/4 A)` for Pauli axis `A`:
/// unchanged when they commute; otherwise picks up a factor of the axis.
fn rotate_generator(axis: &PauliString, gen: &XzForm, k: u8) -> XzForm {
    let ax = XzForm::from_signed(axis);
    let commute =
        ((ax.x & gen.z).count_ones() + (ax.z & gen.x).count_ones()) % 2 == 0;
    if commute || k == 0 {
        return *gen;
    }
    match k {
        // exp(-i pi/2 A) G exp(+i pi/2 A) = -G
        2 => XzForm {
            phase: (gen.phase + 2) % 4,
            ..*gen
        },
        // k=1: -i A G; k=3: +i A G
        1 => {
            let mut prod = ax.mul(gen);
            prod.phase = (prod.phase + 3) % 4;
            prod
        }
        3 => {
            let mut prod = ax.mul(gen);
            prod.phase = (prod.phase + 1) % 4;
            prod
        }
        _ => unreachable!("k is reduced mod 4 and nonzero"),
    }
}

/// How a non-Clifford gate treats the current operator.
enum NonCliffordAction {
    Pass,
    Block { qubit: usize },
}

fn non_clifford_action(p: &PauliString, g: &Gate) -> NonCliffordAction {
    let restriction: Vec<Pauli> = g.qubits.iter().map(|&q| p.letter(q)).collect();
    if restriction.iter().all(|l| *l == Pauli::I) {
        return NonCliffordAction::Pass;
    }
    if let Some(axis) = g.rotation_axis(p.num_qubits()) {
        let matches_axis = g
            .qubits
            .iter()
            .all(|&q| p.letter(q) == axis.letter(q));
        if matches_axis {
            // The restriction is exactly the rotation axis (any overall
            // sign): the operator commutes with the rotation and passes
            // through unchanged.
            return NonCliffordAction::Pass;
        }
    }
    let qubit = *g
        .qubits
        .iter()
        .find(|&&q| p.letter(q) != Pauli::I)
        .expect("restriction is not all identity");
    NonCliffordAction::Block { qubit }
}

fn walk(
    c: &Circuit,
    p: &PauliString,
    from_moment: usize,
    to_moment: usize,
) -> Result<PropagationResult> {
    if p.num_qubits() != c.width() {
        return Err(Error::DimensionMismatch(p.num_qubits(), c.width()));
    }
    let bound = c.num_moments();
    if from_moment > bound || to_moment > bound {
        return Err(Error::InvalidArgument(format!(
            "moment range {from_moment}..{to_moment} exceeds circuit with {bound} moments"
        )));
    }
    let forward = from_moment <= to_moment;
    let (lo, hi) = if forward {
        (from_moment, to_moment)
    } else {
        (to_moment, from_moment)
    };
    let mut current = *p;
    let mut trace = Vec::with_capacity(hi - lo + 1);
    trace.push(current);
    let order: Vec<usize> = if forward {
        (lo..hi).collect()
    } else {
        (lo..hi).rev().collect()
    };
    for m in order {
        for gate in &c.moments()[m] {
            let effective = if forward { gate.clone() } else { gate.inverse() };
            if effective.is_clifford() {
                current = conjugate_clifford(&current, &effective);
            } else {
                match non_clifford_action(&current, gate) {
                    NonCliffordAction::Pass => {}
                    NonCliffordAction::Block { qubit } => {
                        return Err(Error::Incompatible {
                            moment: m,
                            qubit,
                            gate: Box::new(gate.clone()),
                        })
                    }
                }
            }
        }
        trace.push(current);
    }
    Ok(PropagationResult {
        pauli: current,
        layer_trace: trace,
    })
}

/// Moves `p` from the boundary before `from_moment` to the boundary before
/// `to_moment`. A reversed range (`to < from`) propagates backwards through
/// gate inverses. Fails with [`Error::Incompatible`] when a non-Clifford
/// gate blocks the operator.
pub fn propagate(
    c: &Circuit,
    p: &PauliString,
    from_moment: usize,
    to_moment: usize,
) -> Result<PropagationResult> {
    walk(c, p, from_moment, to_moment)
}

/// Scans `p` across `[from_moment, to_moment)` and reports whether every
/// non-Clifford gate admits it; incompatibility is a returned value, not an
/// error.
pub fn check_compatibility(
    c: &Circuit,
    p: &PauliString,
    from_moment: usize,
    to_moment: usize,
) -> Result<CompatibilityReport> {
    match walk(c, p, from_moment, to_moment) {
        Ok(_) => Ok(CompatibilityReport {
            compatible: true,
            violation: None,
        }),
        Err(Error::Incompatible {
            moment,
            qubit,
            gate,
        }) => Ok(CompatibilityReport {
            compatible: false,
            violation: Some(CompatibilityViolation {
                moment,
                qubit,
                gate: *gate,
            }),
        }),
        Err(e) => Err(e),
    }
}

/// The operator that undoes `f` at the end of the circuit: `U f U^dagger`
/// for the circuit unitary `U`.
pub fn disentangling_operator(c: &Circuit, f: &PauliString) -> Result<PauliString> {
    Ok(propagate(c, f, 0, c.num_moments())?.pauli)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{frobenius_distance, pauli_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// Dense oracle: asserts g P g^dagger == Q exactly (including sign).
    fn assert_conjugation_matches_oracle(gate: &Gate, input: &PauliString) {
        let result = conjugate_through_gate(input, gate).expect("Clifford conjugation");
        let width = input.num_qubits();
        let c = Circuit::from_gates(width, [gate.clone()]).unwrap();
        let u = c.to_unitary().unwrap();
        let p_mat = pauli_unitary(input).unwrap();
        let lhs = u.dot(&p_mat).dot(&u.mapv(|v| v.conj()).reversed_axes());
        let rhs = pauli_unitary(&result).unwrap();
        assert!(
            frobenius_distance(&lhs, &rhs) < 1e-10,
            "conjugating {input} through {gate} gave {result}, oracle disagrees"
        );
    }

    #[test]
    fn single_qubit_tables_match_dense_oracle_exhaustively() {
        let fixed = [
            Gate::h(0),
            Gate::s(0),
            Gate::sdg(0),
            Gate::x(0),
            Gate::y(0),
            Gate::z(0),
        ];
        let letters = ["+X", "+Y", "+Z", "-X", "-Y", "-Z"];
        for g in fixed {
            for l in letters {
                assert_conjugation_matches_oracle(&g, &p(l));
            }
        }
        for k in [-4i64, -3, -2, -1, 0, 1, 2, 3, 4] {
            let angle = k as f64 * FRAC_PI_2;
            for g in [Gate::rx(0, angle), Gate::ry(0, angle), Gate::rz(0, angle)] {
                for l in letters {
                    assert_conjugation_matches_oracle(&g, &p(l));
                }
            }
        }
    }

    #[test]
    fn two_qubit_tables_match_dense_oracle_exhaustively() {
        let letters = ['I', 'X', 'Y', 'Z'];
        let mut inputs = Vec::new();
        for a in letters {
            for b in letters {
                for sign in ["+", "-"] {
                    inputs.push(p(&format!("{sign}{a}{b}")));
                }
            }
        }
        let mut gates = vec![Gate::cnot(0, 1), Gate::cnot(1, 0), Gate::cz(0, 1)];
        for k in [-3i64, -1, 0, 1, 2, 3] {
            gates.push(Gate::xx(0, 1, k as f64 * FRAC_PI_2));
        }
        for g in gates {
            for input in &inputs {
                assert_conjugation_matches_oracle(&g, input);
            }
        }
    }

    #[test]
    fn known_conjugation_identities_hold() {
        // CNOT: X on the control spreads to the target.
        let g = Gate::cnot(0, 1);
        assert_eq!(conjugate_through_gate(&p("+XI"), &g).unwrap(), p("+XX"));
        assert_eq!(conjugate_through_gate(&p("+IZ"), &g).unwrap(), p("+ZZ"));
        // H exchanges X and Z.
        assert_eq!(conjugate_through_gate(&p("+Z"), &Gate::h(0)).unwrap(), p("+X"));
        // S sends X to Y and Y to -X.
        assert_eq!(conjugate_through_gate(&p("+X"), &Gate::s(0)).unwrap(), p("+Y"));
        assert_eq!(conjugate_through_gate(&p("+Y"), &Gate::s(0)).unwrap(), p("-X"));
        // H sends Y to -Y.
        assert_eq!(conjugate_through_gate(&p("+Y"), &Gate::h(0)).unwrap(), p("-Y"));
    }

    #[test]
    fn conjugation_rejects_non_clifford_gates() {
        assert!(matches!(
            conjugate_through_gate(&p("+X"), &Gate::t(0)),
            Err(Error::NotClifford(_))
        ));
        assert!(matches!(
            conjugate_through_gate(&p("+X"), &Gate::rz(0, 0.3)),
            Err(Error::NotClifford(_))
        ));
    }

    #[test]
    fn propagation_records_layer_trace() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let r = propagate(&c, &p("+XI"), 0, 1).unwrap();
        assert_eq!(r.pauli, p("+XX"));
        assert_eq!(r.layer_trace, vec![p("+XI"), p("+XX")]);
    }

    #[test]
    fn empty_range_is_identity_propagation() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let r = propagate(&c, &p("+XZ"), 1, 1).unwrap();
        assert_eq!(r.pauli, p("+XZ"));
        assert_eq!(r.layer_trace.len(), 1);
    }

    #[test]
    fn identity_operator_propagates_unchanged() {
        let c = Circuit::from_gates(3, [Gate::h(0), Gate::cnot(0, 1), Gate::t(2)]).unwrap();
        let id = PauliString::identity(3);
        let r = propagate(&c, &id, 0, c.num_moments()).unwrap();
        assert_eq!(r.pauli, id);
        assert!(r.layer_trace.iter().all(|q| q.is_identity()));
    }

    #[test]
    fn reverse_propagation_inverts_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let width = rng.gen_range(2..=4);
            let mut gates = Vec::new();
            for _ in 0..rng.gen_range(1..=15) {
                let a = rng.gen_range(0..width);
                let b = (a + rng.gen_range(1..width)) % width;
                gates.push(match rng.gen_range(0..8) {
                    0 => Gate::h(a),
                    1 => Gate::s(a),
                    2 => Gate::sdg(a),
                    3 => Gate::x(a),
                    4 => Gate::z(a),
                    5 => Gate::cnot(a, b),
                    6 => Gate::cz(a, b),
                    _ => Gate::rx(a, FRAC_PI_2),
                });
            }
            let c = Circuit::from_gates(width, gates).unwrap();
            let start = PauliString::random(&mut rng, width, false);
            let fwd = propagate(&c, &start, 0, c.num_moments()).unwrap().pauli;
            let back = propagate(&c, &fwd, c.num_moments(), 0).unwrap().pauli;
            assert_eq!(back, start, "round trip through\n{c}");
        }
    }

    #[test]
    fn sign_propagates_coherently() {
        let c = Circuit::from_gates(2, [Gate::s(0), Gate::cnot(0, 1), Gate::h(1)]).unwrap();
        let plus = propagate(&c, &p("+YZ"), 0, c.num_moments()).unwrap().pauli;
        let minus = propagate(&c, &p("-YZ"), 0, c.num_moments()).unwrap().pauli;
        assert_eq!(minus, plus.negated());
    }

    #[test]
    fn axis_aligned_operator_passes_non_clifford_gate() {
        let c = Circuit::from_gates(2, [Gate::rz(1, 0.3)]).unwrap();
        // Z on the rotation qubit commutes with the rotation.
        let r = propagate(&c, &p("+IZ"), 0, 1).unwrap();
        assert_eq!(r.pauli, p("+IZ"));
        // A negative sign also passes, unchanged.
        let r = propagate(&c, &p("-IZ"), 0, 1).unwrap();
        assert_eq!(r.pauli, p("-IZ"));
        // X on that qubit is blocked.
        let err = propagate(&c, &p("+IX"), 0, 1);
        match err {
            Err(Error::Incompatible { moment, qubit, .. }) => {
                assert_eq!(moment, 0);
                assert_eq!(qubit, 1);
            }
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn t_gate_blocks_x_but_admits_z() {
        let c = Circuit::from_gates(1, [Gate::t(0)]).unwrap();
        assert!(propagate(&c, &p("+Z"), 0, 1).is_ok());
        assert!(propagate(&c, &p("+X"), 0, 1).is_err());
        assert!(propagate(&c, &p("+Y"), 0, 1).is_err());
    }

    #[test]
    fn xx_axis_gate_admits_exact_axis_only() {
        let c = Circuit::from_gates(2, [Gate::xx(0, 1, 0.4)]).unwrap();
        assert!(propagate(&c, &p("+XX"), 0, 1).is_ok());
        assert!(propagate(&c, &p("-XX"), 0, 1).is_ok());
        assert!(propagate(&c, &p("+XI"), 0, 1).is_err());
        assert!(propagate(&c, &p("+IX"), 0, 1).is_err());
        assert!(propagate(&c, &p("+YY"), 0, 1).is_err());
    }

    #[test]
    fn compatibility_report_names_first_violation() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::t(1)]).unwrap();
        let report = check_compatibility(&c, &p("+IX"), 0, c.num_moments()).unwrap();
        assert!(!report.compatible);
        let v = report.violation.unwrap();
        assert_eq!(v.moment, 0);
        assert_eq!(v.qubit, 1);
        assert_eq!(v.gate.kind, GateKind::T);

        let ok = check_compatibility(&c, &p("+XZ"), 0, c.num_moments()).unwrap();
        assert!(ok.compatible);
        assert!(ok.violation.is_none());
    }

    #[test]
    fn disentangling_operator_through_hadamard_flips_basis() {
        let c = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        assert_eq!(disentangling_operator(&c, &p("+Z")).unwrap(), p("+X"));
        assert_eq!(disentangling_operator(&c, &p("+Y")).unwrap(), p("-Y"));
    }

    #[test]
    fn propagation_matches_dense_oracle_on_random_clifford_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let width = rng.gen_range(2..=4);
            let mut gates = Vec::new();
            for _ in 0..rng.gen_range(1..=12) {
                let a = rng.gen_range(0..width);
                let b = (a + rng.gen_range(1..width)) % width;
                gates.push(match rng.gen_range(0..9) {
                    0 => Gate::h(a),
                    1 => Gate::s(a),
                    2 => Gate::sdg(a),
                    3 => Gate::y(a),
                    4 => Gate::z(a),
                    5 => Gate::cnot(a, b),
                    6 => Gate::cz(a, b),
                    7 => Gate::ry(a, -FRAC_PI_2),
                    _ => Gate::xx(a, b, FRAC_PI_2),
                });
            }
            let c = Circuit::from_gates(width, gates).unwrap();
            let input = PauliString::random(&mut rng, width, true);
            let out = propagate(&c, &input, 0, c.num_moments()).unwrap().pauli;
            let u = c.to_unitary().unwrap();
            let p_mat = pauli_unitary(&input).unwrap();
            let conj = u.dot(&p_mat).dot(&u.mapv(|v| v.conj()).reversed_axes());
            let out_mat = pauli_unitary(&out).unwrap();
            assert!(
                frobenius_distance(&conj, &out_mat) < 1e-9,
                "dense oracle disagrees on\n{c}\ninput {input} -> {out}"
            );
        }
    }

    #[test]
    fn z_string_threads_parity_ladder_unchanged_type() {
        // A CNOT parity ladder keeps Z-type operators Z-type.
        let c = crate::benchmarks::zzzzz_rotation_circuit(5, 0.3).unwrap();
        let input = PauliString::single(5, 4, Pauli::Z);
        let r = propagate(&c, &input, 0, c.num_moments()).unwrap();
        assert_eq!(r.pauli.x_mask(), 0, "output stays Z-type: {}", r.pauli);
        // The middle rotation is along Z, so the scan is compatible.
        let report = check_compatibility(&c, &input, 0, c.num_moments()).unwrap();
        assert!(report.compatible);
    }

    #[test]
    fn conjugation_preserves_commutation_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..200 {
            let a = PauliString::random(&mut rng, 3, false);
            let b = PauliString::random(&mut rng, 3, false);
            let g = match rng.gen_range(0..4) {
                0 => Gate::h(rng.gen_range(0..3)),
                1 => Gate::s(rng.gen_range(0..3)),
                2 => Gate::cnot(0, 1 + rng.gen_range(0..2)),
                _ => Gate::cz(1, 2),
            };
            let ca = conjugate_through_gate(&a, &g).unwrap();
            let cb = conjugate_through_gate(&b, &g).unwrap();
            assert_eq!(
                a.commutes(&b).unwrap(),
                ca.commutes(&cb).unwrap(),
                "conjugation by {g} must preserve commutation"
            );
        }
    }

    #[test]
    fn weight_is_preserved_by_single_qubit_cliffords() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = PauliString::random(&mut rng, 4, false);
            let q = rng.gen_range(0..4);
            for g in [Gate::h(q), Gate::s(q), Gate::x(q)] {
                let out = conjugate_through_gate(&a, &g).unwrap();
                assert_eq!(out.weight(), a.weight());
            }
        }
    }

}
