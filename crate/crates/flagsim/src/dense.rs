//! Dense complex linear algebra for circuits and states.
//!
//! Basis convention is little-endian: qubit 0 is the least significant bit
//! of a computational basis index. Gate applications contract only the
//! operand qubits, so costs stay at `O(4^width)` per gate side instead of a
//! full matrix product.
//!
//! Dense operations are guarded at [`WIDTH_GUARD`] qubits; everything in
//! this module is intended for verification and desk-scale simulation, not
//! for large registers.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Maximum register width for dense-matrix construction and simulation.
pub const WIDTH_GUARD: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn check_width(width: usize) -> Result<()> {
    if width > WIDTH_GUARD {
        Err(Error::WidthGuard {
            width,
            guard: WIDTH_GUARD,
        })
    } else {
        Ok(())
    }
}

/// |0...0> on `width` qubits.
pub fn zero_state(width: usize) -> CVec {
    let mut v = Array1::from_elem(1 << width, ZERO);
    v[0] = ONE;
    v
}

/// The local unitary of a gate: 2x2 for one operand, 4x4 for two. For
/// two-qubit gates, local bit 0 is `qubits[0]` and local bit 1 is
/// `qubits[1]`.
pub fn gate_unitary(g: &Gate) -> CMat {
    let i = Complex64::i();
    match g.kind {
        GateKind::H => {
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            ndarray::array![[s, s], [s, -s]]
        }
        GateKind::S => ndarray::array![[ONE, ZERO], [ZERO, i]],
        GateKind::Sdg => ndarray::array![[ONE, ZERO], [ZERO, -i]],
        GateKind::X => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => ndarray::array![[ZERO, -i], [i, ZERO]],
        GateKind::Z => ndarray::array![[ONE, ZERO], [ZERO, -ONE]],
        GateKind::T => ndarray::array![
            [ONE, ZERO],
            [ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]
        ],
        GateKind::Tdg => ndarray::array![
            [ONE, ZERO],
            [ZERO, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]
        ],
        GateKind::Rx => {
            let h = g.angle.unwrap() / 2.0;
            let c = Complex64::new(h.cos(), 0.0);
            let s = Complex64::new(0.0, -h.sin());
            ndarray::array![[c, s], [s, c]]
        }
        GateKind::Ry => {
            let h = g.angle.unwrap() / 2.0;
            let c = Complex64::new(h.cos(), 0.0);
            let s = Complex64::new(h.sin(), 0.0);
            ndarray::array![[c, -s], [s, c]]
        }
        GateKind::Rz => {
            let h = g.angle.unwrap() / 2.0;
            ndarray::array![
                [Complex64::from_polar(1.0, -h), ZERO],
                [ZERO, Complex64::from_polar(1.0, h)]
            ]
        }
        GateKind::Cnot => {
            // Local bit 0 = control, local bit 1 = target.
            let mut m = Array2::from_elem((4, 4), ZERO);
            m[[0, 0]] = ONE; // |c=0,t=0>
            m[[2, 2]] = ONE; // |c=0,t=1>
            m[[3, 1]] = ONE; // |c=1,t=0> -> |c=1,t=1>
            m[[1, 3]] = ONE; // |c=1,t=1> -> |c=1,t=0>
            m
        }
        GateKind::Cz => {
            let mut m = Array2::from_elem((4, 4), ZERO);
            m[[0, 0]] = ONE;
            m[[1, 1]] = ONE;
            m[[2, 2]] = ONE;
            m[[3, 3]] = -ONE;
            m
        }
        GateKind::Xx => {
            // exp(-i theta/2 X@X): cos on the diagonal, -i sin on the
            // anti-diagonal.
            let h = g.angle.unwrap() / 2.0;
            let c = Complex64::new(h.cos(), 0.0);
            let s = Complex64::new(0.0, -h.sin());
            let mut m = Array2::from_elem((4, 4), ZERO);
            for k in 0..4 {
                m[[k, k]] = c;
                m[[k, 3 - k]] = s;
            }
            m
        }
    }
}

/// Expands local row indices: bit `j` of `s` goes to global bit `qubits[j]`.
fn spread(s: usize, qubits: &[usize]) -> usize {
    let mut out = 0;
    for (j, &q) in qubits.iter().enumerate() {
        if s >> j & 1 == 1 {
            out |= 1 << q;
        }
    }
    out
}

fn qubit_mask(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, &q| m | (1 << q))
}

/// In place: `m <- U_g m`, where `U_g` is the gate embedded at its qubits.
pub fn apply_gate_left(m: &mut CMat, g: &Gate) {
    let u = gate_unitary(g);
    apply_local_left(m, &g.qubits, &u);
}

/// In place: `m <- m U_g^dagger`.
pub fn apply_gate_right_dagger(m: &mut CMat, g: &Gate) {
    let u = gate_unitary(g);
    apply_local_right_dagger(m, &g.qubits, &u);
}

pub(crate) fn apply_local_left(m: &mut CMat, qubits: &[usize], u: &CMat) {
    let n = m.nrows();
    let dim = 1 << qubits.len();
    let mask = qubit_mask(qubits);
    let mut rows: Vec<usize> = vec![0; dim];
    let mut tmp: Vec<CVec> = Vec::with_capacity(dim);
    for base in 0..n {
        if base & mask != 0 {
            continue;
        }
        for (s, r) in rows.iter_mut().enumerate() {
            *r = base | spread(s, qubits);
        }
        tmp.clear();
        for s in 0..dim {
            let mut acc = Array1::from_elem(m.ncols(), ZERO);
            for t in 0..dim {
                let coeff = u[[s, t]];
                if coeff != ZERO {
                    acc.scaled_add(coeff, &m.row(rows[t]));
                }
            }
            tmp.push(acc);
        }
        for s in 0..dim {
            m.row_mut(rows[s]).assign(&tmp[s]);
        }
    }
}

pub(crate) fn apply_local_right_dagger(m: &mut CMat, qubits: &[usize], u: &CMat) {
    let n = m.ncols();
    let dim = 1 << qubits.len();
    let mask = qubit_mask(qubits);
    let mut cols: Vec<usize> = vec![0; dim];
    let mut tmp: Vec<CVec> = Vec::with_capacity(dim);
    for base in 0..n {
        if base & mask != 0 {
            continue;
        }
        for (s, c) in cols.iter_mut().enumerate() {
            *c = base | spread(s, qubits);
        }
        tmp.clear();
        // (m U^dag)[:, c_t] = sum_s m[:, c_s] * conj(u[t, s])
        for t in 0..dim {
            let mut acc = Array1::from_elem(m.nrows(), ZERO);
            for s in 0..dim {
                let coeff = u[[t, s]].conj();
                if coeff != ZERO {
                    acc.scaled_add(coeff, &m.column(cols[s]));
                }
            }
            tmp.push(acc);
        }
        for t in 0..dim {
            m.column_mut(cols[t]).assign(&tmp[t]);
        }
    }
}

/// In place: `v <- U_g v` on a state vector.
pub fn apply_gate_to_state(v: &mut CVec, g: &Gate) {
    let u = gate_unitary(g);
    let n = v.len();
    let dim = 1 << g.qubits.len();
    let mask = qubit_mask(&g.qubits);
    let mut idx: Vec<usize> = vec![0; dim];
    let mut tmp: Vec<Complex64> = vec![ZERO; dim];
    for base in 0..n {
        if base & mask != 0 {
            continue;
        }
        for (s, r) in idx.iter_mut().enumerate() {
            *r = base | spread(s, &g.qubits);
        }
        for s in 0..dim {
            let mut acc = ZERO;
            for t in 0..dim {
                acc += u[[s, t]] * v[idx[t]];
            }
            tmp[s] = acc;
        }
        for s in 0..dim {
            v[idx[s]] = tmp[s];
        }
    }
}

/// The noiseless output state of `c` applied to `input`.
pub fn apply_circuit_to_state(c: &Circuit, input: &CVec) -> Result<CVec> {
    check_width(c.width())?;
    if input.len() != 1 << c.width() {
        return Err(Error::DimensionMismatch(input.len(), 1 << c.width()));
    }
    let mut v = input.clone();
    for (_, g) in c.iter_gates() {
        apply_gate_to_state(&mut v, g);
    }
    Ok(v)
}

/// The full unitary of a circuit, built gate by gate.
pub fn circuit_unitary(c: &Circuit) -> Result<CMat> {
    check_width(c.width())?;
    let n = 1 << c.width();
    let mut m = Array2::from_elem((n, n), ZERO);
    for k in 0..n {
        m[[k, k]] = ONE;
    }
    for (_, g) in c.iter_gates() {
        apply_gate_left(&mut m, g);
    }
    Ok(m)
}

/// The dense matrix of a signed Pauli string.
pub fn pauli_unitary(p: &PauliString) -> Result<CMat> {
    check_width(p.num_qubits())?;
    let n = 1usize << p.num_qubits();
    let mut m = Array2::from_elem((n, n), ZERO);
    let sign = if p.is_negative() { -ONE } else { ONE };
    for col in 0..n {
        // Row index: X components flip bits; phase collects i per Y and -1
        // per Z-component overlap with a set bit.
        let row = col ^ (p.x_mask() as usize);
        let mut amp = sign;
        for q in 0..p.num_qubits() {
            let bit = col >> q & 1;
            match p.letter(q) {
                Pauli::I | Pauli::X => {}
                Pauli::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
                Pauli::Y => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    amp *= if bit == 0 {
                        Complex64::i()
                    } else {
                        -Complex64::i()
                    };
                }
            }
        }
        m[[row, col]] = amp;
    }
    Ok(m)
}

/// Frobenius norm of `a - b`.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Whether `a == exp(i phi) b` for some global phase, within `tol` in
/// Frobenius norm.
pub fn equal_up_to_global_phase(a: &CMat, b: &CMat, tol: f64) -> bool {
    assert_eq!(a.dim(), b.dim());
    // Align phases using the largest entry of b.
    let mut best = 0.0;
    let mut phase = ONE;
    for (x, y) in a.iter().zip(b.iter()) {
        let mag = y.norm();
        if mag > best && x.norm() > 0.0 {
            best = mag;
            phase = x / y;
        }
    }
    if best == 0.0 {
        return frobenius_distance(a, b) <= tol;
    }
    let phase = phase / phase.norm();
    let scaled = b.mapv(|v| v * phase);
    frobenius_distance(a, &scaled) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn mat_approx_eq(a: &CMat, b: &CMat, tol: f64) -> bool {
        frobenius_distance(a, b) <= tol
    }

    #[test]
    fn empty_circuit_unitary_is_identity() {
        let c = Circuit::new(2);
        let u = circuit_unitary(&c).unwrap();
        let eye = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { ONE } else { ZERO });
        assert!(mat_approx_eq(&u, &eye, 1e-15));
    }

    #[test]
    fn hadamard_unitary_matches_definition() {
        let c = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let expected = array![[s, s], [s, -s]];
        assert!(mat_approx_eq(&u, &expected, 1e-15));
    }

    #[test]
    fn cnot_applied_twice_is_identity() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::cnot(0, 1)]).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let eye = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { ONE } else { ZERO });
        assert!(mat_approx_eq(&u, &eye, 1e-12));
    }

    #[test]
    fn cnot_flips_target_for_set_control() {
        // Little-endian: |c=1> is basis index 1.
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        let mut v = zero_state(2);
        v[0] = ZERO;
        v[1] = ONE; // |c=1, t=0>
        let out = apply_circuit_to_state(&c, &v).unwrap();
        assert!((out[3] - ONE).norm() < 1e-15, "maps to |c=1, t=1>");
    }

    #[test]
    fn rotations_compose_to_fixed_gates() {
        // rz(pi/2) == S up to global phase; rx(pi) == X up to global phase.
        let rz = circuit_unitary(&Circuit::from_gates(1, [Gate::rz(0, FRAC_PI_2)]).unwrap())
            .unwrap();
        let s = circuit_unitary(&Circuit::from_gates(1, [Gate::s(0)]).unwrap()).unwrap();
        assert!(equal_up_to_global_phase(&rz, &s, 1e-12));

        let rx = circuit_unitary(&Circuit::from_gates(1, [Gate::rx(0, PI)]).unwrap()).unwrap();
        let x = circuit_unitary(&Circuit::from_gates(1, [Gate::x(0)]).unwrap()).unwrap();
        assert!(equal_up_to_global_phase(&rx, &x, 1e-12));
    }

    #[test]
    fn xx_at_zero_angle_is_identity() {
        let u = circuit_unitary(&Circuit::from_gates(2, [Gate::xx(0, 1, 0.0)]).unwrap()).unwrap();
        let eye = Array2::from_shape_fn((4, 4), |(i, j)| if i == j { ONE } else { ZERO });
        assert!(mat_approx_eq(&u, &eye, 1e-15));
    }

    #[test]
    fn xx_squares_to_pauli_xx() {
        // xx(pi/2)^2 = exp(-i pi/2 XX) = -i XX.
        let c = Circuit::from_gates(2, [Gate::xx(0, 1, FRAC_PI_2), Gate::xx(0, 1, FRAC_PI_2)])
            .unwrap();
        let u = circuit_unitary(&c).unwrap();
        let xx = pauli_unitary(&"+XX".parse().unwrap()).unwrap();
        assert!(equal_up_to_global_phase(&u, &xx, 1e-12));
    }

    #[test]
    fn pauli_unitary_matches_kronecker_structure() {
        // Y matrix on 1 qubit.
        let y = pauli_unitary(&"+Y".parse().unwrap()).unwrap();
        let i = Complex64::i();
        assert!(mat_approx_eq(&y, &array![[ZERO, -i], [i, ZERO]], 1e-15));
        // -Z flips the sign.
        let mz = pauli_unitary(&"-Z".parse().unwrap()).unwrap();
        assert!(mat_approx_eq(&mz, &array![[-ONE, ZERO], [ZERO, ONE]], 1e-15));
        // Multi-qubit: XZ = X(q0) Z(q1); entry (1,0) should be +1 (X flips
        // bit 0, Z sees bit 1 = 0).
        let xz = pauli_unitary(&"+XZ".parse().unwrap()).unwrap();
        assert!((xz[[1, 0]] - ONE).norm() < 1e-15);
        assert!((xz[[3, 2]] + ONE).norm() < 1e-15);
    }

    #[test]
    fn pauli_product_matches_dense_multiplication() {
        // X * Z = -iY as matrices.
        let x = pauli_unitary(&"+X".parse().unwrap()).unwrap();
        let z = pauli_unitary(&"+Z".parse().unwrap()).unwrap();
        let y = pauli_unitary(&"+Y".parse().unwrap()).unwrap();
        let prod = x.dot(&z);
        let expected = y.mapv(|v| v * -Complex64::i());
        assert!(mat_approx_eq(&prod, &expected, 1e-15));
    }

    #[test]
    fn commutation_predicate_matches_dense_commutator() {
        let a: PauliString = "+IXYZ".parse().unwrap();
        let b: PauliString = "+ZZXI".parse().unwrap();
        let ma = pauli_unitary(&a).unwrap();
        let mb = pauli_unitary(&b).unwrap();
        let ab = ma.dot(&mb);
        let ba = mb.dot(&ma);
        assert!(a.commutes(&b).unwrap());
        assert!(mat_approx_eq(&ab, &ba, 1e-12));

        let c: PauliString = "+XIII".parse().unwrap();
        let d: PauliString = "+ZIII".parse().unwrap();
        assert!(!c.commutes(&d).unwrap());
        let anti = pauli_unitary(&c).unwrap().dot(&pauli_unitary(&d).unwrap())
            + pauli_unitary(&d).unwrap().dot(&pauli_unitary(&c).unwrap());
        let zero = Array2::from_elem((16, 16), ZERO);
        assert!(mat_approx_eq(&anti, &zero, 1e-12));
    }

    #[test]
    fn width_guard_rejects_large_registers() {
        let c = Circuit::new(13);
        assert!(matches!(
            circuit_unitary(&c),
            Err(Error::WidthGuard { width: 13, guard: 12 })
        ));
    }

    #[test]
    fn global_phase_comparison_accepts_phase_and_rejects_difference() {
        let h = gate_unitary(&Gate::h(0));
        let rotated = h.mapv(|v| v * Complex64::from_polar(1.0, 0.7));
        assert!(equal_up_to_global_phase(&rotated, &h, 1e-12));
        let s = gate_unitary(&Gate::s(0));
        assert!(!equal_up_to_global_phase(&s, &h, 1e-12));
    }
}
