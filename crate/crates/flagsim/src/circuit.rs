//! Gate-list circuit representation with derived moment structure.
//!
//! A [`Circuit`] is a fixed-width sequence of moments; each moment holds
//! gates acting on pairwise-disjoint qubits. Moments are always derived by
//! greedy packing: every public constructor appends gates at the earliest
//! moment that respects per-qubit ordering, so a circuit's moment structure
//! is a pure function of its gate sequence.
//!
//! The text format is one gate per line after a `qubits <N>` header:
//! lowercase mnemonic, qubit indices, then a decimal radian angle for
//! rotation gates. `#` starts a comment. Serialization prints angles with 17
//! significant digits so a parse/serialize round trip is bit-exact.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// Absolute tolerance used to decide whether an angle is an exact multiple
/// of pi/2 (and hence whether a rotation gate is Clifford).
const HALF_PI_TOL: f64 = 1e-12;

/// The supported gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    T,
    Tdg,
    Cnot,
    Cz,
    Rx,
    Ry,
    Rz,
    Xx,
}

impl GateKind {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Xx => "xx",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "cnot" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "xx" => GateKind::Xx,
            _ => return None,
        })
    }

    /// Number of qubit operands.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Xx => 2,
            _ => 1,
        }
    }

    /// Whether the gate carries an angle parameter.
    pub fn has_angle(&self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Xx
        )
    }
}

/// Returns `k` when `angle` is `k * pi/2` within tolerance.
pub(crate) fn half_pi_steps(angle: f64) -> Option<i64> {
    let k = (angle / FRAC_PI_2).round();
    if (angle - k * FRAC_PI_2).abs() < HALF_PI_TOL {
        Some(k as i64)
    } else {
        None
    }
}

/// One gate application: kind, operand qubits, and an angle for rotations.
///
/// Rotation gates follow the half-angle convention: `rx/ry/rz(theta)` is
/// `exp(-i theta/2 * A)` for axis A in {X, Y, Z}, and `xx(theta)` is
/// `exp(-i theta/2 * XX)`, so the maximally entangling gate is `xx(pi/2)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
}

impl Gate {
    fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<f64>) -> Self {
        debug_assert_eq!(qubits.len(), kind.arity());
        debug_assert_eq!(angle.is_some(), kind.has_angle());
        if qubits.len() == 2 {
            assert!(qubits[0] != qubits[1], "gate operands must be distinct");
        }
        if let Some(a) = angle {
            assert!(a.is_finite(), "gate angle must be finite");
        }
        Gate {
            kind,
            qubits,
            angle,
        }
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q], None)
    }
    pub fn s(q: usize) -> Self {
        Gate::new(GateKind::S, vec![q], None)
    }
    pub fn sdg(q: usize) -> Self {
        Gate::new(GateKind::Sdg, vec![q], None)
    }
    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q], None)
    }
    pub fn y(q: usize) -> Self {
        Gate::new(GateKind::Y, vec![q], None)
    }
    pub fn z(q: usize) -> Self {
        Gate::new(GateKind::Z, vec![q], None)
    }
    pub fn t(q: usize) -> Self {
        Gate::new(GateKind::T, vec![q], None)
    }
    pub fn tdg(q: usize) -> Self {
        Gate::new(GateKind::Tdg, vec![q], None)
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target], None)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cz, vec![a, b], None)
    }
    pub fn rx(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Rx, vec![q], Some(angle))
    }
    pub fn ry(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Ry, vec![q], Some(angle))
    }
    pub fn rz(q: usize, angle: f64) -> Self {
        Gate::new(GateKind::Rz, vec![q], Some(angle))
    }
    pub fn xx(a: usize, b: usize, angle: f64) -> Self {
        Gate::new(GateKind::Xx, vec![a, b], Some(angle))
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    /// Whether conjugation by this gate maps Pauli operators to Pauli
    /// operators. Rotations qualify exactly at multiples of pi/2.
    pub fn is_clifford(&self) -> bool {
        match self.kind {
            GateKind::H
            | GateKind::S
            | GateKind::Sdg
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::Cnot
            | GateKind::Cz => true,
            GateKind::T | GateKind::Tdg => false,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Xx => {
                half_pi_steps(self.angle.unwrap()).is_some()
            }
        }
    }

    /// For rotations: the number of quarter turns when Clifford.
    pub(crate) fn clifford_quarter_turns(&self) -> Option<i64> {
        self.angle.and_then(half_pi_steps)
    }

    /// The Pauli rotation axis, embedded in a width-`n` register: X/Y/Z for
    /// the corresponding rotations and Pauli gates, Z for S/T variants, and
    /// X on both qubits for `xx`. `None` for H, CNOT, and CZ, whose axes are
    /// not Pauli strings.
    pub fn rotation_axis(&self, n: usize) -> Option<PauliString> {
        let letter = match self.kind {
            GateKind::X | GateKind::Rx => Pauli::X,
            GateKind::Y | GateKind::Ry => Pauli::Y,
            GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::T
            | GateKind::Tdg
            | GateKind::Rz => Pauli::Z,
            GateKind::Xx => {
                let mut p = PauliString::single(n, self.qubits[0], Pauli::X);
                p = p
                    .multiply(&PauliString::single(n, self.qubits[1], Pauli::X))
                    .expect("same width")
                    .to_signed()
                    .expect("disjoint product is real");
                return Some(p);
            }
            GateKind::H | GateKind::Cnot | GateKind::Cz => return None,
        };
        Some(PauliString::single(n, self.qubits[0], letter))
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        match self.kind {
            GateKind::S => Gate::sdg(self.qubits[0]),
            GateKind::Sdg => Gate::s(self.qubits[0]),
            GateKind::T => Gate::tdg(self.qubits[0]),
            GateKind::Tdg => Gate::t(self.qubits[0]),
            GateKind::Rx => Gate::rx(self.qubits[0], -self.angle.unwrap()),
            GateKind::Ry => Gate::ry(self.qubits[0], -self.angle.unwrap()),
            GateKind::Rz => Gate::rz(self.qubits[0], -self.angle.unwrap()),
            GateKind::Xx => Gate::xx(self.qubits[0], self.qubits[1], -self.angle.unwrap()),
            // H, Pauli gates, CNOT, CZ are involutions.
            _ => self.clone(),
        }
    }

    fn qubit_mask(&self) -> u64 {
        self.qubits.iter().fold(0u64, |m, q| m | (1 << q))
    }
}

impl fmt::Display for Gate {
    /// Writes the text-format line for the gate.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        if let Some(a) = self.angle {
            write!(f, " {}", format_angle(a))?;
        }
        Ok(())
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
pub(crate) fn format_angle(a: f64) -> String {
    format!("{a:.16e}")
}

/// A fixed-width circuit as a list of moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    width: usize,
    moments: Vec<Vec<Gate>>,
}

impl Circuit {
    /// An empty circuit on `width` qubits.
    pub fn new(width: usize) -> Self {
        assert!(
            width >= 1 && width <= crate::pauli::MAX_QUBITS,
            "width {width} out of range"
        );
        Circuit {
            width,
            moments: Vec::new(),
        }
    }

    /// Builds a circuit by greedily packing `gates` into moments.
    pub fn from_gates<I: IntoIterator<Item = Gate>>(width: usize, gates: I) -> Result<Self> {
        let mut c = Circuit::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Appends a gate at the earliest moment consistent with per-qubit order.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for &q in &gate.qubits {
            if q >= self.width {
                return Err(Error::InvalidArgument(format!(
                    "gate {gate} references qubit {q} outside width {}",
                    self.width
                )));
            }
        }
        let mask = gate.qubit_mask();
        // Earliest moment after the last moment that touches any operand.
        let mut slot = 0;
        for (m, moment) in self.moments.iter().enumerate().rev() {
            if moment.iter().any(|g| g.qubit_mask() & mask != 0) {
                slot = m + 1;
                break;
            }
        }
        if slot == self.moments.len() {
            self.moments.push(Vec::new());
        }
        self.moments[slot].push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_moments(&self) -> usize {
        self.moments.len()
    }

    pub fn moments(&self) -> &[Vec<Gate>] {
        &self.moments
    }

    /// All gates in time order, tagged with their moment index.
    pub fn iter_gates(&self) -> impl Iterator<Item = (usize, &Gate)> {
        self.moments
            .iter()
            .enumerate()
            .flat_map(|(m, gs)| gs.iter().map(move |g| (m, g)))
    }

    pub fn gate_count(&self) -> usize {
        self.moments.iter().map(|m| m.len()).sum()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.iter_gates().filter(|(_, g)| g.is_two_qubit()).count()
    }

    pub fn non_clifford_count(&self) -> usize {
        self.iter_gates().filter(|(_, g)| !g.is_clifford()).count()
    }

    /// Whether every gate belongs to the native set {rx, ry, rz, xx}.
    pub fn is_native(&self) -> bool {
        self.iter_gates().all(|(_, g)| {
            matches!(
                g.kind,
                GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Xx
            )
        })
    }

    /// Parses the text format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            match &mut circuit {
                None => {
                    if tokens[0] != "qubits" {
                        return Err(err("expected 'qubits <N>' header".into()));
                    }
                    if tokens.len() != 2 {
                        return Err(err("header takes exactly one argument".into()));
                    }
                    let width: usize = tokens[1]
                        .parse()
                        .map_err(|_| err(format!("invalid qubit count '{}'", tokens[1])))?;
                    if width < 1 || width > crate::pauli::MAX_QUBITS {
                        return Err(err(format!("qubit count {width} out of range")));
                    }
                    circuit = Some(Circuit::new(width));
                }
                Some(c) => {
                    if tokens[0] == "qubits" {
                        return Err(err("duplicate 'qubits' header".into()));
                    }
                    let kind = GateKind::from_mnemonic(tokens[0])
                        .ok_or_else(|| err(format!("unknown gate '{}'", tokens[0])))?;
                    let expected = kind.arity() + usize::from(kind.has_angle());
                    if tokens.len() - 1 != expected {
                        return Err(err(format!(
                            "gate '{}' takes {} argument(s), got {}",
                            tokens[0],
                            expected,
                            tokens.len() - 1
                        )));
                    }
                    let mut qubits = Vec::with_capacity(kind.arity());
                    for tok in &tokens[1..=kind.arity()] {
                        let q: usize = tok
                            .parse()
                            .map_err(|_| err(format!("invalid qubit index '{tok}'")))?;
                        if q >= c.width {
                            return Err(err(format!(
                                "qubit {q} out of range for width {}",
                                c.width
                            )));
                        }
                        qubits.push(q);
                    }
                    if qubits.len() == 2 && qubits[0] == qubits[1] {
                        return Err(err(format!("gate operands must be distinct, got {qubits:?}")));
                    }
                    let angle = if kind.has_angle() {
                        let tok = tokens[kind.arity() + 1];
                        let a: f64 = tok
                            .parse()
                            .map_err(|_| err(format!("invalid angle '{tok}'")))?;
                        if !a.is_finite() {
                            return Err(err(format!("angle '{tok}' is not finite")));
                        }
                        Some(a)
                    } else {
                        None
                    };
                    c.push(Gate {
                        kind,
                        qubits,
                        angle,
                    })
                    .map_err(|e| err(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse {
            line: 1,
            msg: "missing 'qubits <N>' header".into(),
        })
    }

    /// Serializes to the text format. `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {}\n", self.width);
        for (_, g) in self.iter_gates() {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    /// The circuit's full unitary as a dense matrix (little-endian basis).
    pub fn to_unitary(&self) -> Result<ndarray::Array2<num_complex::Complex64>> {
        crate::dense::circuit_unitary(self)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}
