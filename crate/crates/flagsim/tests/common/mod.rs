//! Shared helpers for the integration suites: seeded random Clifford
//! circuits and random moment sections.

use std::f64::consts::FRAC_PI_2;

use flagsim::{Circuit, Gate};
use rand::Rng;

/// Draws one uniformly random Clifford gate on a register of `width`
/// qubits. Covers the named single-qubit Cliffords, both entangling
/// gates, and quarter-turn rotations (including the Clifford angles of
/// the native `rx`/`rz`/`xx` set).
pub fn random_clifford_gate<R: Rng>(rng: &mut R, width: usize) -> Gate {
    let two_qubit_ok = width >= 2;
    loop {
        let pick = rng.gen_range(0..10u8);
        let q = rng.gen_range(0..width);
        let quarter = FRAC_PI_2 * f64::from(rng.gen_range(1..=3u8));
        let gate = match pick {
            0 => Gate::h(q),
            1 => Gate::s(q),
            2 => Gate::sdg(q),
            3 => Gate::x(q),
            4 => Gate::y(q),
            5 => Gate::z(q),
            6 => Gate::rx(q, quarter),
            7 => Gate::rz(q, quarter),
            8 | 9 if two_qubit_ok => {
                let a = rng.gen_range(0..width);
                let mut b = rng.gen_range(0..width);
                while b == a {
                    b = rng.gen_range(0..width);
                }
                match pick {
                    8 => Gate::cnot(a, b),
                    _ => {
                        if rng.gen_bool(0.5) {
                            Gate::cz(a, b)
                        } else {
                            Gate::xx(a, b, FRAC_PI_2)
                        }
                    }
                }
            }
            _ => continue,
        };
        return gate;
    }
}

/// Builds a random Clifford circuit with exactly `gates` gates.
pub fn random_clifford_circuit<R: Rng>(rng: &mut R, width: usize, gates: usize) -> Circuit {
    let mut c = Circuit::new(width);
    for _ in 0..gates {
        c.push(random_clifford_gate(rng, width))
            .expect("random Clifford gate fits the register");
    }
    c
}

/// Picks a random non-empty moment range `[a, b)` of `c`.
pub fn random_section<R: Rng>(rng: &mut R, c: &Circuit) -> std::ops::Range<usize> {
    let m = c.num_moments();
    assert!(m >= 1, "circuit must have at least one moment");
    let a = rng.gen_range(0..m);
    let b = rng.gen_range(a + 1..=m);
    a..b
}
