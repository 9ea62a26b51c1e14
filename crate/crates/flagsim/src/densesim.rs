//! Density-matrix simulation of noisy circuits with flag postselection.
//!
//! Noise is applied moment-synchronously: all unitaries of a moment act
//! first, then every channel that moment's gates induce, in gate order.
//! Postselection projects each flag ancilla onto `|+>`, reports the
//! survival probability, renormalizes, and traces the ancillas out.

use ndarray::Array2;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::dense::{
    apply_circuit_to_state, apply_gate_left, apply_gate_right_dagger, apply_local_left,
    apply_local_right_dagger, check_width, zero_state, CMat, CVec,
};
use crate::error::{Error, Result};
use crate::fault::{chain_neighbors, NoiseKind, NoiseModel};
use crate::gadget::{instrument, NestedFlagSet};
use crate::native::compile_to_native;

/// Survival probabilities below this are reported as degenerate rather
/// than renormalized into numerical noise.
pub const SURVIVAL_FLOOR: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `|0...0><0...0|` on `width` qubits.
pub fn zero_density(width: usize) -> Result<CMat> {
    check_width(width)?;
    let dim = 1usize << width;
    let mut rho = Array2::from_elem((dim, dim), ZERO);
    rho[[0, 0]] = Complex64::new(1.0, 0.0);
    Ok(rho)
}

/// The pure-state density matrix `|psi><psi|`.
pub fn density_from_state(psi: &CVec) -> CMat {
    let n = psi.len();
    let mut rho = Array2::from_elem((n, n), ZERO);
    for i in 0..n {
        for j in 0..n {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    rho
}

fn width_of(rho: &CMat) -> Result<usize> {
    let n = rho.nrows();
    if rho.ncols() != n || n == 0 || !n.is_power_of_two() {
        return Err(Error::DimensionMismatch(rho.nrows(), rho.ncols()));
    }
    Ok(n.trailing_zeros() as usize)
}

fn trace_re(rho: &CMat) -> f64 {
    rho.diag().sum().re
}

/// In place: `rho <- U rho U^dagger` for one gate.
fn conjugate_gate(rho: &mut CMat, g: &Gate) {
    apply_gate_left(rho, g);
    apply_gate_right_dagger(rho, g);
}

/// In place single-qubit depolarizing channel
/// `rho <- (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`.
pub fn apply_depolarizing(rho: &mut CMat, qubit: usize, p: f64) -> Result<()> {
    let width = width_of(rho)?;
    if qubit >= width {
        return Err(Error::DimensionMismatch(qubit + 1, width));
    }
    if p == 0.0 {
        return Ok(());
    }
    let mut acc = rho.mapv(|v| v * (1.0 - p));
    for gate in [Gate::x(qubit), Gate::y(qubit), Gate::z(qubit)] {
        let mut branch = rho.clone();
        conjugate_gate(&mut branch, &gate);
        acc.scaled_add(Complex64::new(p / 3.0, 0.0), &branch);
    }
    *rho = acc;
    Ok(())
}

/// The channels one gate induces under the model, applied in place after
/// the gate's moment.
fn apply_gate_noise(rho: &mut CMat, g: &Gate, width: usize, m: &NoiseModel) -> Result<()> {
    match m.kind {
        NoiseKind::Depolarizing | NoiseKind::Crosstalk => {
            if !g.is_two_qubit() {
                return Ok(());
            }
            for &q in &g.qubits {
                apply_depolarizing(rho, q, m.p)?;
            }
            if m.kind == NoiseKind::Crosstalk {
                for q in chain_neighbors(g, width) {
                    apply_depolarizing(rho, q, m.p * m.crosstalk_ratio)?;
                }
            }
        }
        NoiseKind::Overrotation => {
            let extra = Gate {
                kind: g.kind,
                qubits: g.qubits.clone(),
                angle: Some(m.epsilon),
            };
            conjugate_gate(rho, &extra);
        }
    }
    Ok(())
}

/// Evolves `input` through the noisy circuit. Overrotation requires a
/// native-compiled circuit (every gate then has a rotation angle to
/// overshoot).
pub fn simulate_from(c: &Circuit, m: &NoiseModel, input: &CMat) -> Result<CMat> {
    m.validate()?;
    check_width(c.width())?;
    if width_of(input)? != c.width() {
        return Err(Error::DimensionMismatch(input.nrows(), 1 << c.width()));
    }
    if m.kind == NoiseKind::Overrotation && !c.is_native() {
        return Err(Error::InvalidArgument(
            "overrotation simulation requires a native-compiled circuit".into(),
        ));
    }
    let mut rho = input.clone();
    for gates in c.moments() {
        for g in gates {
            conjugate_gate(&mut rho, g);
        }
        for g in gates {
            apply_gate_noise(&mut rho, g, c.width(), m)?;
        }
    }
    Ok(rho)
}

/// [`simulate_from`] starting in `|0...0>`.
pub fn simulate(c: &Circuit, m: &NoiseModel) -> Result<CMat> {
    simulate_from(c, m, &zero_density(c.width())?)
}

fn project_flags_unnormalized(rho: &CMat, flags: &NestedFlagSet) -> Result<(CMat, f64)> {
    let width = width_of(rho)?;
    let plus = Array2::from_shape_vec(
        (2, 2),
        vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ],
    )
    .expect("2x2 shape");
    let mut work = rho.clone();
    for &a in &flags.ancillas() {
        if a >= width {
            return Err(Error::DimensionMismatch(a + 1, width));
        }
        apply_local_left(&mut work, &[a], &plus);
        apply_local_right_dagger(&mut work, &[a], &plus);
    }
    let raw = trace_re(&work);
    if raw > 1.0 + 1e-9 {
        log::warn!("flag survival {raw:.12} exceeds 1");
    }
    let survival = raw.clamp(0.0, 1.0);
    Ok((work, survival))
}

/// Partial trace over the qubits at and above `keep_width`.
pub fn trace_out_high(rho: &CMat, keep_width: usize) -> Result<CMat> {
    let width = width_of(rho)?;
    if keep_width > width {
        return Err(Error::DimensionMismatch(keep_width, width));
    }
    let low_dim = 1usize << keep_width;
    let high_dim = 1usize << (width - keep_width);
    let mut out = Array2::from_elem((low_dim, low_dim), ZERO);
    for h in 0..high_dim {
        let base = h << keep_width;
        for i in 0..low_dim {
            for j in 0..low_dim {
                out[[i, j]] += rho[[base | i, base | j]];
            }
        }
    }
    Ok(out)
}

/// Projects every flag ancilla onto `|+>`, returning the renormalized
/// data-register state and the survival probability. Errors with
/// [`Error::DegeneratePostselection`] when essentially nothing survives.
/// An empty flag set postselects nothing and survives with certainty.
pub fn postselect_flags(rho: &CMat, flags: &NestedFlagSet) -> Result<(CMat, f64)> {
    if flags.is_empty() {
        return Ok((rho.clone(), 1.0));
    }
    let (mut work, survival) = project_flags_unnormalized(rho, flags)?;
    if survival < SURVIVAL_FLOOR {
        return Err(Error::DegeneratePostselection(survival));
    }
    let inv = Complex64::new(1.0 / survival, 0.0);
    work.mapv_inplace(|v| v * inv);
    let data_width = flags
        .data_width()
        .expect("non-empty flag sets have a data width");
    let reduced = trace_out_high(&work, data_width)?;
    Ok((reduced, survival))
}

/// The probability that every flag measurement accepts; degenerate values
/// are returned as-is rather than rejected.
pub fn flag_survival(rho: &CMat, flags: &NestedFlagSet) -> Result<f64> {
    if flags.is_empty() {
        return Ok(1.0);
    }
    Ok(project_flags_unnormalized(rho, flags)?.1)
}

/// `Re <psi| rho |psi>`, clamped into `[0, 1]`; excursions beyond 1e-9
/// are logged as numerical-health warnings.
pub fn fidelity(rho: &CMat, reference: &CVec) -> Result<f64> {
    if rho.nrows() != reference.len() || rho.ncols() != reference.len() {
        return Err(Error::DimensionMismatch(rho.nrows(), reference.len()));
    }
    let mut val = ZERO;
    for i in 0..reference.len() {
        for j in 0..reference.len() {
            val += reference[i].conj() * rho[[i, j]] * reference[j];
        }
    }
    if val.im.abs() > 1e-9 {
        log::warn!("fidelity has imaginary part {:.3e}", val.im);
    }
    let re = val.re;
    if !(-1e-9..=1.0 + 1e-9).contains(&re) {
        log::warn!("fidelity {re:.12} outside [0, 1]");
    }
    Ok(re.clamp(0.0, 1.0))
}

/// One noisy evaluation of a flagged circuit.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SimOutcome {
    /// Fidelity of the bare noisy circuit against its noiseless output.
    pub fidelity_raw: f64,
    /// Fidelity of the instrumented circuit's data register after
    /// postselecting every flag on `|+>`.
    pub fidelity_postselected: f64,
    /// Probability that all flag measurements accept.
    pub survival_probability: f64,
    /// The model's swept parameter (p or epsilon).
    pub parameter: f64,
}

/// Simulates the raw and the instrumented circuit under the model and
/// compares both against the noiseless output state. Under overrotation
/// both circuits are native-compiled first. An empty flag set yields the
/// raw baseline with certain survival.
pub fn evaluate_flagged(c: &Circuit, flags: &NestedFlagSet, m: &NoiseModel) -> Result<SimOutcome> {
    if let Some(dw) = flags.data_width() {
        if dw != c.width() {
            return Err(Error::DimensionMismatch(dw, c.width()));
        }
    }
    let prep = |circ: &Circuit| -> Result<Circuit> {
        if m.kind == NoiseKind::Overrotation {
            compile_to_native(circ)
        } else {
            Ok(circ.clone())
        }
    };
    let reference = apply_circuit_to_state(c, &zero_state(c.width()))?;
    let rho_raw = simulate(&prep(c)?, m)?;
    let fidelity_raw = fidelity(&rho_raw, &reference)?;
    if flags.is_empty() {
        return Ok(SimOutcome {
            fidelity_raw,
            fidelity_postselected: fidelity_raw,
            survival_probability: 1.0,
            parameter: m.parameter(),
        });
    }
    let instrumented = instrument(c, flags)?;
    let rho = simulate(&prep(&instrumented)?, m)?;
    let (rho_data, survival_probability) = postselect_flags(&rho, flags)?;
    let fidelity_postselected = fidelity(&rho_data, &reference)?;
    Ok(SimOutcome {
        fidelity_raw,
        fidelity_postselected,
        survival_probability,
        parameter: m.parameter(),
    })
}
