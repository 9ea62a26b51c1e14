//! Flag gadgets: ancilla-based parity checks wrapped around a circuit
//! section.
//!
//! A gadget prepares an ancilla in |+>, entangles it with the data register
//! through a controlled Pauli P at the section entry, lets the section run,
//! and disentangles with the controlled image P' of P under the section. An
//! error-free run returns the ancilla to |+> exactly; a fault inside the
//! section whose propagated error anticommutes with P' flips the ancilla to
//! |->, where X-basis postselection removes that branch.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::propagate::propagate;

/// A single synthesized flag.
///
/// `entangle` is normalized to a plus sign. `disentangle` is stored
/// unsigned; when the propagated image carries a minus sign, `sign_fix` is
/// set and realized as a Z gate on the ancilla after the disentangling legs
/// (Z on the control equals controlling on the negated Pauli).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagGadget {
    pub entangle: PauliString,
    pub disentangle: PauliString,
    pub ancilla: usize,
    pub entry: usize,
    pub exit: usize,
    pub sign_fix: bool,
}

/// Synthesizes a flag for `p` over `section` (moment boundaries) of `c`.
/// The ancilla defaults to the first index past the data register; override
/// it with [`FlagGadget::with_ancilla`] when nesting several flags.
pub fn synthesize(c: &Circuit, p: &PauliString, section: Range<usize>) -> Result<FlagGadget> {
    if p.is_identity() {
        return Err(Error::InvalidArgument(
            "an identity flag detects nothing and is rejected".into(),
        ));
    }
    if p.num_qubits() != c.width() {
        return Err(Error::DimensionMismatch(p.num_qubits(), c.width()));
    }
    if section.start >= section.end || section.end > c.num_moments() {
        return Err(Error::InvalidArgument(format!(
            "flag section {}..{} is empty or exceeds the circuit's {} moments",
            section.start,
            section.end,
            c.num_moments()
        )));
    }
    let entangle = p.abs();
    let image = propagate(c, &entangle, section.start, section.end)?.pauli;
    Ok(FlagGadget {
        entangle,
        disentangle: image.abs(),
        ancilla: c.width(),
        entry: section.start,
        exit: section.end,
        sign_fix: image.is_negative(),
    })
}

/// One controlled-Pauli leg from the ancilla onto data qubit `q`. The Y leg
/// conjugates a CNOT by S on the target: S X S^dagger = Y exactly.
fn controlled_leg(ancilla: usize, q: usize, letter: Pauli, out: &mut Vec<Gate>) {
    match letter {
        Pauli::X => out.push(Gate::cnot(ancilla, q)),
        Pauli::Z => out.push(Gate::cz(ancilla, q)),
        Pauli::Y => {
            out.push(Gate::sdg(q));
            out.push(Gate::cnot(ancilla, q));
            out.push(Gate::s(q));
        }
        Pauli::I => unreachable!("legs are only emitted for support qubits"),
    }
}

fn controlled_pauli(ancilla: usize, p: &PauliString, out: &mut Vec<Gate>) {
    for q in p.support() {
        controlled_leg(ancilla, q, p.letter(q), out);
    }
}

impl FlagGadget {
    /// Moves the gadget onto a different ancilla line.
    pub fn with_ancilla(mut self, ancilla: usize) -> Self {
        self.ancilla = ancilla;
        self
    }

    /// Gates emitted at the entry boundary: ancilla preparation followed by
    /// the controlled-P legs in ascending qubit order (legs commute; the
    /// order is fixed for determinism).
    pub fn entangle_gates(&self) -> Vec<Gate> {
        let mut out = vec![Gate::h(self.ancilla)];
        controlled_pauli(self.ancilla, &self.entangle, &mut out);
        out
    }

    /// Gates emitted at the exit boundary: the controlled-P' legs, then the
    /// sign-fix Z when the propagated image was negative.
    pub fn disentangle_gates(&self) -> Vec<Gate> {
        let mut out = Vec::new();
        controlled_pauli(self.ancilla, &self.disentangle, &mut out);
        if self.sign_fix {
            out.push(Gate::z(self.ancilla));
        }
        out
    }

    /// Two-qubit cost of the gadget: one controlled leg per non-identity
    /// letter of P and of P'.
    pub fn two_qubit_gate_count(&self) -> usize {
        self.entangle.weight() + self.disentangle.weight()
    }

    /// Width of the data register the gadget was synthesized for.
    pub fn data_width(&self) -> usize {
        self.entangle.num_qubits()
    }
}

impl fmt::Display for FlagGadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "flag {} -> {}{} on ancilla {} over {}..{}",
            self.entangle,
            if self.sign_fix { "-" } else { "" },
            self.disentangle,
            self.ancilla,
            self.entry,
            self.exit
        )
    }
}

/// An ordered collection of flags on one circuit, outermost first.
/// Entangling legs are emitted in list order and disentangling legs in
/// reverse list order, so properly nested sections form matched
/// brackets around the data.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedFlagSet {
    pub gadgets: Vec<FlagGadget>,
}

/// First problem found when checking a flag set's internal consistency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NestingViolation {
    IdentityEntangle { index: usize },
    EmptySection { index: usize },
    WidthMismatch { index: usize, expected: usize, found: usize },
    AncillaInData { index: usize, ancilla: usize, data_width: usize },
    AncillaCollision { first: usize, second: usize, ancilla: usize },
    /// Two sections partially overlap without one containing the other.
    IntervalsCross { first: usize, second: usize },
    /// An inner section is listed before the section that contains it;
    /// the list must be ordered outermost first so that disentangling in
    /// reverse list order closes the inner bracket before the outer one.
    OrderInverted { outer_listed_later: usize, inner_listed_first: usize },
}

impl fmt::Display for NestingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestingViolation::IdentityEntangle { index } => {
                write!(f, "flag {index} has an identity entangling operator")
            }
            NestingViolation::EmptySection { index } => {
                write!(f, "flag {index} spans an empty section")
            }
            NestingViolation::WidthMismatch { index, expected, found } => write!(
                f,
                "flag {index} is defined on {found} qubits but the set expects {expected}"
            ),
            NestingViolation::AncillaInData { index, ancilla, data_width } => write!(
                f,
                "flag {index} uses ancilla {ancilla}, inside the {data_width}-qubit data register"
            ),
            NestingViolation::AncillaCollision { first, second, ancilla } => write!(
                f,
                "flags {first} and {second} share ancilla {ancilla}"
            ),
            NestingViolation::IntervalsCross { first, second } => write!(
                f,
                "sections of flags {first} and {second} cross instead of nesting"
            ),
            NestingViolation::OrderInverted { outer_listed_later, inner_listed_first } => write!(
                f,
                "ordering: flag {inner_listed_first} is nested inside flag {outer_listed_later} \
                 but listed first; disentangling order would not reverse the entangling order"
            ),
        }
    }
}

impl NestedFlagSet {
    pub fn new(gadgets: Vec<FlagGadget>) -> Self {
        NestedFlagSet { gadgets }
    }

    pub fn single(gadget: FlagGadget) -> Self {
        NestedFlagSet { gadgets: vec![gadget] }
    }

    pub fn empty() -> Self {
        NestedFlagSet::default()
    }

    pub fn len(&self) -> usize {
        self.gadgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gadgets.is_empty()
    }

    /// Width of the data register, or `None` for an empty set.
    pub fn data_width(&self) -> Option<usize> {
        self.gadgets.first().map(|g| g.data_width())
    }

    pub fn ancillas(&self) -> Vec<usize> {
        self.gadgets.iter().map(|g| g.ancilla).collect()
    }

    /// Checks ancilla distinctness, per-gadget sanity, and that the list
    /// order realizes reversed disentangling for every nested pair.
    pub fn validate_nesting(&self) -> std::result::Result<(), NestingViolation> {
        let expected = match self.data_width() {
            Some(w) => w,
            None => return Ok(()),
        };
        for (i, g) in self.gadgets.iter().enumerate() {
            if g.entangle.is_identity() {
                return Err(NestingViolation::IdentityEntangle { index: i });
            }
            if g.entry >= g.exit {
                return Err(NestingViolation::EmptySection { index: i });
            }
            if g.data_width() != expected || g.disentangle.num_qubits() != expected {
                return Err(NestingViolation::WidthMismatch {
                    index: i,
                    expected,
                    found: g.data_width().max(g.disentangle.num_qubits()),
                });
            }
            if g.ancilla < expected {
                return Err(NestingViolation::AncillaInData {
                    index: i,
                    ancilla: g.ancilla,
                    data_width: expected,
                });
            }
        }
        for i in 0..self.gadgets.len() {
            for j in i + 1..self.gadgets.len() {
                let (a, b) = (&self.gadgets[i], &self.gadgets[j]);
                if a.ancilla == b.ancilla {
                    return Err(NestingViolation::AncillaCollision {
                        first: i,
                        second: j,
                        ancilla: a.ancilla,
                    });
                }
                let disjoint = a.exit <= b.entry || b.exit <= a.entry;
                let a_contains_b = a.entry <= b.entry && b.exit <= a.exit;
                let b_contains_a = b.entry <= a.entry && a.exit <= b.exit;
                if disjoint || a_contains_b {
                    continue;
                }
                if b_contains_a {
                    return Err(NestingViolation::OrderInverted {
                        outer_listed_later: j,
                        inner_listed_first: i,
                    });
                }
                return Err(NestingViolation::IntervalsCross { first: i, second: j });
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate_nesting().is_ok()
    }
}

/// Emits the instrumented circuit: the original gates with every flag's
/// preparation/entangling legs inserted at its entry boundary and
/// disentangling legs (reverse flag order) plus sign fixes at its exit
/// boundary. The ancilla measurement basis is X, applied by the simulator's
/// postselection rather than by a gate.
pub fn instrument(c: &Circuit, flags: &NestedFlagSet) -> Result<Circuit> {
    instrument_with_injected_faults(c, flags, &[])
}

/// [`instrument`], with Pauli faults inserted at chosen boundaries: a fault
/// listed at moment `t` is placed after moment `t`'s gates and before any
/// flag legs attached to boundary `t+1`. A fault at a flag's entry boundary
/// therefore precedes the entangling legs (the flag cannot see it), and one
/// at the exit boundary precedes the disentangling legs (the flag checks
/// it), matching the detection combinatorics exactly.
pub fn instrument_with_injected_faults(
    c: &Circuit,
    flags: &NestedFlagSet,
    faults: &[(usize, PauliString)],
) -> Result<Circuit> {
    if let Err(v) = flags.validate_nesting() {
        return Err(Error::InvalidArgument(v.to_string()));
    }
    if let Some(w) = flags.data_width() {
        if w != c.width() {
            return Err(Error::DimensionMismatch(w, c.width()));
        }
    }
    for g in &flags.gadgets {
        if g.exit > c.num_moments() {
            return Err(Error::InvalidArgument(format!(
                "flag section {}..{} exceeds the circuit's {} moments",
                g.entry,
                g.exit,
                c.num_moments()
            )));
        }
    }
    for (moment, fault) in faults {
        if *moment >= c.num_moments() {
            return Err(Error::InvalidArgument(format!(
                "fault moment {moment} exceeds the circuit's {} moments",
                c.num_moments()
            )));
        }
        if fault.num_qubits() != c.width() {
            return Err(Error::DimensionMismatch(fault.num_qubits(), c.width()));
        }
    }
    if flags.is_empty() && faults.is_empty() {
        return Ok(c.clone());
    }

    let width = flags
        .ancillas()
        .iter()
        .map(|a| a + 1)
        .max()
        .unwrap_or(0)
        .max(c.width());
    let mut out = Circuit::new(width);
    for t in 0..=c.num_moments() {
        // Exits close before new entries open, so that adjacent sections
        // (one flag's exit at another's entry) chain correctly.
        for g in flags.gadgets.iter().rev().filter(|g| g.exit == t) {
            for gate in g.disentangle_gates() {
                out.push(gate)?;
            }
        }
        for g in flags.gadgets.iter().filter(|g| g.entry == t) {
            for gate in g.entangle_gates() {
                out.push(gate)?;
            }
        }
        if t < c.num_moments() {
            for gate in &c.moments()[t] {
                out.push(gate.clone())?;
            }
            for (_, fault) in faults.iter().filter(|(m, _)| *m == t) {
                for gate in pauli_gates(fault) {
                    out.push(gate)?;
                }
            }
        }
    }
    Ok(out)
}

/// The Pauli operator as a list of single-qubit gates (sign discarded: a
/// global sign is invisible to density matrices and detection alike).
pub(crate) fn pauli_gates(p: &PauliString) -> Vec<Gate> {
    p.support()
        .into_iter()
        .map(|q| match p.letter(q) {
            Pauli::X => Gate::x(q),
            Pauli::Y => Gate::y(q),
            Pauli::Z => Gate::z(q),
            Pauli::I => unreachable!("support excludes identity"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::dense::{apply_circuit_to_state, CVec};
    use ndarray::Array1;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, width: usize) -> CVec {
        let dim = 1usize << width;
        let mut v: CVec = Array1::zeros(dim);
        for a in v.iter_mut() {
            *a = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.mapv_into(|a| a / norm)
    }

    fn random_clifford_circuit(rng: &mut ChaCha8Rng, width: usize, gates: usize) -> Circuit {
        let mut list = Vec::new();
        for _ in 0..gates {
            let a = rng.gen_range(0..width);
            let b = (a + rng.gen_range(1..width.max(2))) % width;
            list.push(match rng.gen_range(0..7) {
                0 => Gate::h(a),
                1 => Gate::s(a),
                2 => Gate::sdg(a),
                3 => Gate::x(a),
                4 if width > 1 => Gate::cnot(a, b),
                5 if width > 1 => Gate::cz(a, b),
                _ => Gate::z(a),
            });
        }
        Circuit::from_gates(width, list).unwrap()
    }

    /// Embeds |psi> on the data qubits with |0> ancillas above.
    fn embed(data: &CVec, full_width: usize) -> CVec {
        let mut v: CVec = Array1::zeros(1 << full_width);
        for (i, a) in data.iter().enumerate() {
            v[i] = *a;
        }
        v
    }

    /// The expected output: (C|psi>) on data qubits, |+> on every ancilla.
    fn expected_output(c: &Circuit, input: &CVec, ancillas: usize) -> CVec {
        let data_out = apply_circuit_to_state(c, input).unwrap();
        let mut out = data_out;
        for _ in 0..ancillas {
            let dim = out.len();
            let mut bigger: CVec = Array1::zeros(dim * 2);
            let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for (i, a) in out.iter().enumerate() {
                bigger[i] = *a * amp;
                bigger[i + dim] = *a * amp;
            }
            out = bigger;
        }
        out
    }

    fn assert_states_close(a: &CVec, b: &CVec, tol: f64) {
        assert_eq!(a.len(), b.len());
        let dist = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dist < tol, "states differ by {dist}");
    }

    #[test]
    fn synthesize_spreads_x_through_cnot() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("+XI"), 0..1).unwrap();
        assert_eq!(g.entangle, p("+XI"));
        assert_eq!(g.disentangle, p("+XX"));
        assert!(!g.sign_fix);
        assert_eq!(g.ancilla, 2);
        assert_eq!(g.two_qubit_gate_count(), 3);
    }

    #[test]
    fn synthesize_moves_negative_sign_into_sign_fix() {
        let c = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        let g = synthesize(&c, &p("+Y"), 0..1).unwrap();
        assert_eq!(g.disentangle, p("+Y"));
        assert!(g.sign_fix);
    }

    #[test]
    fn synthesize_normalizes_entangle_sign() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("-XI"), 0..1).unwrap();
        assert_eq!(g.entangle, p("+XI"));
        assert!(!g.entangle.is_negative());
    }

    #[test]
    fn synthesize_rejects_bad_inputs() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        assert!(synthesize(&c, &PauliString::identity(2), 0..1).is_err());
        assert!(synthesize(&c, &p("+X"), 0..1).is_err());
        assert!(synthesize(&c, &p("+XI"), 0..0).is_err());
        assert!(synthesize(&c, &p("+XI"), 0..2).is_err());
        let t = Circuit::from_gates(1, [Gate::t(0)]).unwrap();
        assert!(matches!(
            synthesize(&t, &p("+X"), 0..1),
            Err(Error::Incompatible { .. })
        ));
    }

    #[test]
    fn leg_emission_matches_letters() {
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
        let g = synthesize(&c, &p("+XYZ"), 0..2).unwrap();
        let entry = g.entangle_gates();
        assert_eq!(entry[0], Gate::h(3));
        assert_eq!(entry[1], Gate::cnot(3, 0));
        assert_eq!(
            &entry[2..5],
            &[Gate::sdg(1), Gate::cnot(3, 1), Gate::s(1)]
        );
        assert_eq!(entry[5], Gate::cz(3, 2));
        let two_qubit = entry.iter().filter(|g| g.is_two_qubit()).count();
        assert_eq!(two_qubit, 3);
    }

    #[test]
    fn instrument_with_no_flags_is_identity_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_clifford_circuit(&mut rng, 3, 8);
        let out = instrument(&c, &NestedFlagSet::empty()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn noiseless_single_flag_preserves_data_and_restores_ancilla() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("+XI"), 0..1).unwrap();
        let instr = instrument(&c, &NestedFlagSet::single(g)).unwrap();
        assert_eq!(instr.width(), 3);
        for _ in 0..20 {
            let psi = random_state(&mut rng, 2);
            let full_in = embed(&psi, 3);
            let out = apply_circuit_to_state(&instr, &full_in).unwrap();
            let expected = expected_output(&c, &psi, 1);
            assert_states_close(&out, &expected, 1e-12);
        }
    }

    #[test]
    fn noiseless_sign_fix_flag_still_restores_plus() {
        let c = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        let g = synthesize(&c, &p("+Y"), 0..1).unwrap();
        assert!(g.sign_fix);
        let instr = instrument(&c, &NestedFlagSet::single(g)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let psi = random_state(&mut rng, 1);
            let out = apply_circuit_to_state(&instr, &embed(&psi, 2)).unwrap();
            assert_states_close(&out, &expected_output(&c, &psi, 1), 1e-12);
        }
    }

    #[test]
    fn noiseless_nested_pair_preserves_identity_on_four_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for round in 0..10 {
            let c = random_clifford_circuit(&mut rng, 2, 6);
            let pa = PauliString::random(&mut rng, 2, true);
            let pb = PauliString::random(&mut rng, 2, true);
            let outer = match synthesize(&c, &pa, 0..c.num_moments()) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let inner = synthesize(&c, &pb, 0..c.num_moments())
                .unwrap()
                .with_ancilla(3);
            let set = NestedFlagSet::new(vec![outer, inner]);
            set.validate_nesting().unwrap();
            let instr = instrument(&c, &set).unwrap();
            assert_eq!(instr.width(), 4);
            let psi = random_state(&mut rng, 2);
            let out = apply_circuit_to_state(&instr, &embed(&psi, 4)).unwrap();
            assert_states_close(&out, &expected_output(&c, &psi, 2), 1e-10);
            let _ = round;
        }
    }

    #[test]
    fn adjacent_sections_emit_exit_before_entry() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::cnot(0, 1)]).unwrap();
        let first = synthesize(&c, &p("+XI"), 0..1).unwrap();
        let second = synthesize(&c, &p("+ZI"), 1..2).unwrap().with_ancilla(3);
        let set = NestedFlagSet::new(vec![first, second]);
        let instr = instrument(&c, &set).unwrap();
        // Moment-major iteration preserves per-qubit program order; on
        // qubit 0 the first flag's disentangling leg (ancilla 2) must come
        // before the second flag's entangling leg (ancilla 3).
        let on_qubit0: Vec<&Gate> = instr
            .iter_gates()
            .map(|(_, g)| g)
            .filter(|g| g.qubits.contains(&0))
            .collect();
        let legs: Vec<(GateKind, usize)> = on_qubit0
            .iter()
            .map(|g| (g.kind, *g.qubits.first().unwrap()))
            .collect();
        assert_eq!(
            legs,
            vec![
                (GateKind::Cnot, 2), // first flag entangles
                (GateKind::Cnot, 0), // moment 0
                (GateKind::Cnot, 2), // first flag disentangles at the boundary
                (GateKind::Cz, 3),   // second flag entangles after it
                (GateKind::Cnot, 0), // moment 1
                (GateKind::Cz, 3),   // second flag disentangles
            ],
            "exit legs must close before the next flag opens"
        );
        // Noiseless identity still holds across chained sections.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let psi = random_state(&mut rng, 2);
        let out = apply_circuit_to_state(&instr, &embed(&psi, 4)).unwrap();
        assert_states_close(&out, &expected_output(&c, &psi, 2), 1e-12);
    }

    #[test]
    fn validate_nesting_accepts_empty_and_proper_sets() {
        assert!(NestedFlagSet::empty().validate_nesting().is_ok());
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::h(1)]).unwrap();
        let outer = synthesize(&c, &p("+XII"), 0..3).unwrap();
        let inner = synthesize(&c, &p("+IZI"), 1..2).unwrap().with_ancilla(4);
        let set = NestedFlagSet::new(vec![outer, inner]);
        assert!(set.is_valid());
    }

    #[test]
    fn validate_nesting_reports_each_violation_kind() {
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::h(1)]).unwrap();
        let base = synthesize(&c, &p("+XII"), 0..3).unwrap();

        let collide = NestedFlagSet::new(vec![
            base.clone(),
            synthesize(&c, &p("+IZI"), 1..2).unwrap(),
        ]);
        assert!(matches!(
            collide.validate_nesting(),
            Err(NestingViolation::AncillaCollision { ancilla: 3, .. })
        ));

        let crossing = NestedFlagSet::new(vec![
            synthesize(&c, &p("+XII"), 0..2).unwrap(),
            synthesize(&c, &p("+IZI"), 1..3).unwrap().with_ancilla(4),
        ]);
        assert!(matches!(
            crossing.validate_nesting(),
            Err(NestingViolation::IntervalsCross { first: 0, second: 1 })
        ));

        let inverted = NestedFlagSet::new(vec![
            synthesize(&c, &p("+IZI"), 1..2).unwrap(),
            synthesize(&c, &p("+XII"), 0..3).unwrap().with_ancilla(4),
        ]);
        assert!(matches!(
            inverted.validate_nesting(),
            Err(NestingViolation::OrderInverted {
                outer_listed_later: 1,
                inner_listed_first: 0
            })
        ));

        let mut identity_flag = base.clone();
        identity_flag.entangle = PauliString::identity(3);
        assert!(matches!(
            NestedFlagSet::single(identity_flag).validate_nesting(),
            Err(NestingViolation::IdentityEntangle { index: 0 })
        ));

        let mut empty_section = base.clone();
        empty_section.exit = empty_section.entry;
        assert!(matches!(
            NestedFlagSet::single(empty_section).validate_nesting(),
            Err(NestingViolation::EmptySection { index: 0 })
        ));

        let mut in_data = base.clone();
        in_data.ancilla = 1;
        assert!(matches!(
            NestedFlagSet::single(in_data).validate_nesting(),
            Err(NestingViolation::AncillaInData { ancilla: 1, .. })
        ));

        let mismatched = NestedFlagSet::new(vec![
            base,
            FlagGadget {
                entangle: p("+XI"),
                disentangle: p("+XI"),
                ancilla: 4,
                entry: 0,
                exit: 1,
                sign_fix: false,
            },
        ]);
        assert!(matches!(
            mismatched.validate_nesting(),
            Err(NestingViolation::WidthMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn instrument_rejects_invalid_sets_with_description() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("+XI"), 0..1).unwrap();
        let set = NestedFlagSet::new(vec![g.clone(), g]);
        match instrument(&c, &set) {
            Err(Error::InvalidArgument(msg)) => assert!(msg.contains("ancilla")),
            other => panic!("expected argument error, got {other:?}"),
        }
    }

    #[test]
    fn injected_fault_sits_between_moment_and_boundary_legs() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("+XI"), 0..1).unwrap();
        let set = NestedFlagSet::single(g);
        let faulted =
            instrument_with_injected_faults(&c, &set, &[(0, p("+ZI"))]).unwrap();
        let on_qubit0: Vec<&Gate> = faulted
            .iter_gates()
            .map(|(_, g)| g)
            .filter(|g| g.qubits.contains(&0))
            .collect();
        let kinds: Vec<GateKind> = on_qubit0.iter().map(|g| g.kind).collect();
        assert_eq!(
            kinds,
            vec![GateKind::Cnot, GateKind::Cnot, GateKind::Z, GateKind::Cnot],
            "entry leg, data gate, fault, exit leg"
        );
    }

    #[test]
    fn two_qubit_cost_is_bounded_by_twice_the_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let width = rng.gen_range(2..=5);
            let gates = rng.gen_range(1..=12);
            let c = random_clifford_circuit(&mut rng, width, gates);
            let cand = PauliString::random(&mut rng, width, true);
            let g = synthesize(&c, &cand, 0..c.num_moments()).unwrap();
            assert_eq!(
                g.two_qubit_gate_count(),
                g.entangle.weight() + g.disentangle.weight()
            );
            assert!(g.two_qubit_gate_count() <= 2 * width);
            let emitted: usize = g
                .entangle_gates()
                .iter()
                .chain(g.disentangle_gates().iter())
                .filter(|g| g.is_two_qubit())
                .count();
            assert_eq!(emitted, g.two_qubit_gate_count());
        }
    }

    #[test]
    fn gadget_serializes_to_json_with_pauli_text() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let g = synthesize(&c, &p("+XI"), 0..1).unwrap();
        let js = serde_json::to_value(&g).unwrap();
        assert_eq!(js["entangle"], "+XI");
        assert_eq!(js["disentangle"], "+XX");
        assert_eq!(js["ancilla"], 2);
        assert_eq!(js["entry"], 0);
        assert_eq!(js["exit"], 1);
        assert_eq!(js["sign_fix"], false);
        let back: FlagGadget = serde_json::from_value(js).unwrap();
        assert_eq!(back, g);
    }
}
