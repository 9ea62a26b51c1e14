//! Compilation onto the native rotation gate set {rx, ry, rz, xx}.
//!
//! Every supported gate is rewritten as single-qubit rotations plus at most
//! one `xx` entangling gate, preserving the unitary up to global phase.
//! Clifford inputs stay Clifford: fixed gates become rotations at exact
//! multiples of pi/2, and each CNOT or CZ becomes exactly one `xx(pi/2)`
//! plus single-qubit rotations.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::Result;

/// Rewrites `c` over the native gate set. The output unitary equals the
/// input up to global phase; moment structure is re-derived by greedy
/// packing of the expanded gate sequence.
pub fn compile_to_native(c: &Circuit) -> Result<Circuit> {
    let mut gates: Vec<Gate> = Vec::with_capacity(c.gate_count() * 2);
    for (_, g) in c.iter_gates() {
        expand(g, &mut gates);
    }
    Circuit::from_gates(c.width(), gates)
}

fn expand(g: &Gate, out: &mut Vec<Gate>) {
    match g.kind {
        GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Xx => out.push(g.clone()),
        GateKind::X => out.push(Gate::rx(g.qubits[0], PI)),
        GateKind::Y => out.push(Gate::ry(g.qubits[0], PI)),
        GateKind::Z => out.push(Gate::rz(g.qubits[0], PI)),
        GateKind::S => out.push(Gate::rz(g.qubits[0], FRAC_PI_2)),
        GateKind::Sdg => out.push(Gate::rz(g.qubits[0], -FRAC_PI_2)),
        GateKind::T => out.push(Gate::rz(g.qubits[0], FRAC_PI_4)),
        GateKind::Tdg => out.push(Gate::rz(g.qubits[0], -FRAC_PI_4)),
        GateKind::H => expand_h(g.qubits[0], out),
        GateKind::Cnot => expand_cnot(g.qubits[0], g.qubits[1], out),
        GateKind::Cz => {
            // CZ = (I@H) CNOT (I@H) on the second operand.
            expand_h(g.qubits[1], out);
            expand_cnot(g.qubits[0], g.qubits[1], out);
            expand_h(g.qubits[1], out);
        }
    }
}

/// H = ry(pi/2) rz(pi) up to global phase (rz applied first in time).
fn expand_h(q: usize, out: &mut Vec<Gate>) {
    out.push(Gate::rz(q, PI));
    out.push(Gate::ry(q, FRAC_PI_2));
}

/// CNOT via a single maximally entangling xx(pi/2), from the identity
/// CNOT ~ exp(i pi/4 (I - Z_c)(I - X_t)); the Z_c X_t factor is an xx
/// rotation conjugated by ry on the control.
fn expand_cnot(c: usize, t: usize, out: &mut Vec<Gate>) {
    out.push(Gate::ry(c, -FRAC_PI_2));
    out.push(Gate::xx(c, t, FRAC_PI_2));
    out.push(Gate::ry(c, FRAC_PI_2));
    out.push(Gate::rx(t, FRAC_PI_2));
    out.push(Gate::rz(c, FRAC_PI_2));
}
