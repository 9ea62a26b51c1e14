//! Single-fault enumeration, propagation to the output layer, and the
//! simulation-free flag quality metric.
//!
//! Every noise model defines a deterministic set of fault locations, each
//! emitting a small set of Pauli errors at a known rate weight. Propagating
//! each error to the circuit output gives the output error set; a flag
//! detects exactly the eligible faults whose propagated error anticommutes
//! with its disentangling operator. The quality score rewards the weighted
//! number of detected faults and charges a per-leg penalty for the fault
//! locations the gadget itself adds.

use std::collections::BTreeSet;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gadget::{instrument, pauli_gates, synthesize, FlagGadget, NestedFlagSet};
use crate::native::compile_to_native;
use crate::pauli::{Pauli, PauliString};
use crate::propagate::{check_compatibility, propagate, CompatibilityViolation};

/// Default ratio between a neighbor qubit's error rate and the gate rate.
pub const CROSSTALK_RATIO: f64 = 0.1;

/// Penalty per unit of flag weight in the quality score, depolarizing
/// model: each controlled leg is one two-qubit gate with six enumerable
/// faults.
pub const DEPOLARIZING_PENALTY: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarizing,
    Crosstalk,
    Overrotation,
}

/// One of the three supported error models with its parameters. The
/// crosstalk topology is a linear chain: qubit `i` neighbors `i - 1` and
/// `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Per-gate error probability (depolarizing and crosstalk kinds).
    pub p: f64,
    /// Overrotation angle in radians (overrotation kind).
    pub epsilon: f64,
    /// Neighbor rate as a fraction of the gate rate (crosstalk kind).
    pub crosstalk_ratio: f64,
    /// Overrides the per-weight quality penalty; the defaults are 6 for
    /// depolarizing, 6·(1 + ratio) for crosstalk, and 1 for overrotation
    /// (the latter two are heuristic and deliberately configurable).
    pub penalty_override: Option<f64>,
}

impl NoiseModel {
    pub fn depolarizing(p: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::Depolarizing,
            p,
            epsilon: 0.0,
            crosstalk_ratio: CROSSTALK_RATIO,
            penalty_override: None,
        }
    }

    pub fn crosstalk(p: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::Crosstalk,
            ..NoiseModel::depolarizing(p)
        }
    }

    pub fn overrotation(epsilon: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::Overrotation,
            p: 0.0,
            epsilon,
            crosstalk_ratio: CROSSTALK_RATIO,
            penalty_override: None,
        }
    }

    /// The swept parameter: `p` for channel models, `epsilon` for
    /// overrotation.
    pub fn parameter(&self) -> f64 {
        match self.kind {
            NoiseKind::Depolarizing | NoiseKind::Crosstalk => self.p,
            NoiseKind::Overrotation => self.epsilon,
        }
    }

    /// Same model at a different parameter value.
    pub fn with_parameter(&self, value: f64) -> Self {
        let mut m = *self;
        match self.kind {
            NoiseKind::Depolarizing | NoiseKind::Crosstalk => m.p = value,
            NoiseKind::Overrotation => m.epsilon = value,
        }
        m
    }

    /// Quality-score penalty per unit of flag weight.
    pub fn penalty_coefficient(&self) -> f64 {
        if let Some(c) = self.penalty_override {
            return c;
        }
        match self.kind {
            NoiseKind::Depolarizing => DEPOLARIZING_PENALTY,
            NoiseKind::Crosstalk => DEPOLARIZING_PENALTY * (1.0 + self.crosstalk_ratio),
            NoiseKind::Overrotation => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NoiseKind::Depolarizing | NoiseKind::Crosstalk => {
                if !(0.0..=1.0).contains(&self.p) {
                    return Err(Error::InvalidArgument(format!(
                        "error probability {} outside [0, 1]",
                        self.p
                    )));
                }
                if !(0.0..=1.0).contains(&self.crosstalk_ratio) {
                    return Err(Error::InvalidArgument(format!(
                        "crosstalk ratio {} outside [0, 1]",
                        self.crosstalk_ratio
                    )));
                }
            }
            NoiseKind::Overrotation => {
                if !self.epsilon.is_finite() {
                    return Err(Error::InvalidArgument(
                        "overrotation angle must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    /// Depolarizing channel on one qubit of a two-qubit gate.
    GateQubit,
    /// Reduced-rate depolarizing channel on a chain neighbor of a gate.
    CrosstalkNeighbor,
    /// Coherent overrotation along a native gate's own Pauli axis.
    RotationAxis,
}

/// One fault site: a qubit at a moment boundary emitting a known set of
/// Pauli errors at relative rate `rate_weight`. Errors act immediately
/// after the source gate's moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultLocation {
    pub moment: usize,
    pub qubit: usize,
    pub source: Gate,
    pub kind: LocationKind,
    pub letters: Vec<Pauli>,
    pub rate_weight: f64,
}

impl FaultLocation {
    /// The fault operators this location can emit, embedded at the given
    /// register width. Axis locations emit the source gate's full
    /// (possibly multi-qubit) rotation axis.
    pub fn fault_operators(&self, width: usize) -> Vec<PauliString> {
        match self.kind {
            LocationKind::GateQubit | LocationKind::CrosstalkNeighbor => self
                .letters
                .iter()
                .map(|&l| PauliString::single(width, self.qubit, l))
                .collect(),
            LocationKind::RotationAxis => vec![self
                .source
                .rotation_axis(width)
                .expect("axis locations only arise for rotation gates")
                .abs()],
        }
    }

    /// Total rate weight across this location's enumerable faults.
    pub fn total_weight(&self, width: usize) -> f64 {
        self.fault_operators(width).len() as f64 * self.rate_weight
    }
}

/// Chain neighbors of a gate's qubits, ascending, excluding the gate's own
/// qubits, deduplicated.
pub(crate) fn chain_neighbors(gate: &Gate, width: usize) -> Vec<usize> {
    let own: BTreeSet<usize> = gate.qubits.iter().copied().collect();
    let mut neighbors = BTreeSet::new();
    for &q in &gate.qubits {
        if q > 0 {
            neighbors.insert(q - 1);
        }
        if q + 1 < width {
            neighbors.insert(q + 1);
        }
    }
    neighbors.into_iter().filter(|q| !own.contains(q)).collect()
}

/// Deterministic fault-site enumeration in time order. Depolarizing sites
/// follow each two-qubit gate on both its qubits (single-qubit gates are
/// noiseless); crosstalk adds reduced-rate sites on chain neighbors;
/// overrotation places one axis site after every gate of a native circuit.
pub fn fault_locations(c: &Circuit, m: &NoiseModel) -> Result<Vec<FaultLocation>> {
    m.validate()?;
    if m.kind == NoiseKind::Overrotation && !c.is_native() {
        return Err(Error::InvalidArgument(
            "overrotation fault enumeration requires a native-compiled circuit".into(),
        ));
    }
    let xyz = vec![Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::new();
    for (moment, gate) in c.iter_gates() {
        match m.kind {
            NoiseKind::Depolarizing | NoiseKind::Crosstalk => {
                if !gate.is_two_qubit() {
                    continue;
                }
                for &q in &gate.qubits {
                    out.push(FaultLocation {
                        moment,
                        qubit: q,
                        source: gate.clone(),
                        kind: LocationKind::GateQubit,
                        letters: xyz.clone(),
                        rate_weight: 1.0,
                    });
                }
                if m.kind == NoiseKind::Crosstalk {
                    for q in chain_neighbors(gate, c.width()) {
                        out.push(FaultLocation {
                            moment,
                            qubit: q,
                            source: gate.clone(),
                            kind: LocationKind::CrosstalkNeighbor,
                            letters: xyz.clone(),
                            rate_weight: m.crosstalk_ratio,
                        });
                    }
                }
            }
            NoiseKind::Overrotation => {
                let axis = gate
                    .rotation_axis(c.width())
                    .expect("native circuits contain only rotation gates");
                out.push(FaultLocation {
                    moment,
                    qubit: gate.qubits[0],
                    source: gate.clone(),
                    kind: LocationKind::RotationAxis,
                    letters: axis.support().map(|q| axis.letter(q)).collect(),
                    rate_weight: 1.0,
                });
            }
        }
    }
    Ok(out)
}

/// A fault successfully propagated to the circuit's final boundary.
#[derive(Debug, Clone)]
pub struct OutputError {
    pub location_index: usize,
    /// Moment of the source gate; the error acts after this moment.
    pub moment: usize,
    /// The operator inserted at the fault site.
    pub fault: PauliString,
    /// The operator at the circuit's final boundary.
    pub output: PauliString,
    pub rate_weight: f64,
}

/// A fault whose propagation was blocked by an incompatible non-Clifford
/// gate; scored as undetected (conservative).
#[derive(Debug, Clone)]
pub struct BlockedFault {
    pub location_index: usize,
    pub moment: usize,
    pub fault: PauliString,
    pub rate_weight: f64,
    pub blocked_moment: usize,
    pub blocked_qubit: usize,
}

/// The effective single-fault error model at the output layer.
#[derive(Debug, Clone)]
pub struct OutputErrorSet {
    pub circuit: Circuit,
    pub locations: Vec<FaultLocation>,
    pub errors: Vec<OutputError>,
    pub non_propagable: Vec<BlockedFault>,
    /// Total rate weight over all enumerable faults, propagable or not.
    pub total_weight: f64,
}

/// Propagates every enumerable fault of `(c, m)` to the circuit's final
/// boundary.
pub fn output_error_set(c: &Circuit, m: &NoiseModel) -> Result<OutputErrorSet> {
    let locations = fault_locations(c, m)?;
    let end = c.num_moments();
    let mut errors = Vec::new();
    let mut non_propagable = Vec::new();
    let mut total_weight = 0.0;
    for (idx, loc) in locations.iter().enumerate() {
        for fault in loc.fault_operators(c.width()) {
            total_weight += loc.rate_weight;
            match propagate(c, &fault, loc.moment + 1, end) {
                Ok(r) => errors.push(OutputError {
                    location_index: idx,
                    moment: loc.moment,
                    fault,
                    output: r.pauli,
                    rate_weight: loc.rate_weight,
                }),
                Err(Error::Incompatible { moment, qubit, .. }) => {
                    non_propagable.push(BlockedFault {
                        location_index: idx,
                        moment: loc.moment,
                        fault,
                        rate_weight: loc.rate_weight,
                        blocked_moment: moment,
                        blocked_qubit: qubit,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(OutputErrorSet {
        circuit: c.clone(),
        locations,
        errors,
        non_propagable,
        total_weight,
    })
}

/// A flag with its detection count and quality score.
#[derive(Debug, Clone)]
pub struct FlagScore {
    pub flag: FlagGadget,
    /// Rate-weighted count of detected faults (integral for the
    /// depolarizing model).
    pub n_detected: f64,
    /// n_detected − penalty·(w(P) + w(P')).
    pub q: f64,
    pub detected_fraction: f64,
}

/// Detection predicate for one flag against one output error.
///
/// A fault acting after moment `t` is eligible when `entry ≤ t < exit`:
/// errors already present when the flag entangles cancel out of the parity
/// check exactly, and errors after the disentangling legs are never seen.
/// Eligible faults are detected when their error anticommutes with the
/// disentangling operator — compared at the final boundary against the
/// propagated image `p_prime_end` when the suffix admits it, otherwise
/// re-propagated to the exit boundary.
fn detects(
    set: &OutputErrorSet,
    flag: &FlagGadget,
    p_prime_end: &Option<PauliString>,
    err: &OutputError,
) -> bool {
    if err.moment < flag.entry || err.moment >= flag.exit {
        return false;
    }
    match p_prime_end {
        Some(pp) => !err
            .output
            .commutes(pp)
            .expect("output errors share the circuit width"),
        None => match propagate(&set.circuit, &err.fault, err.moment + 1, flag.exit) {
            Ok(r) => !r
                .pauli
                .commutes(&flag.disentangle)
                .expect("section errors share the circuit width"),
            Err(_) => false,
        },
    }
}

/// The disentangling operator moved to the final boundary, or `None` when
/// a non-Clifford suffix blocks it (detection then falls back to per-fault
/// comparison at the exit boundary).
fn p_prime_at_end(set: &OutputErrorSet, flag: &FlagGadget) -> Option<PauliString> {
    propagate(
        &set.circuit,
        &flag.disentangle,
        flag.exit,
        set.circuit.num_moments(),
    )
    .ok()
    .map(|r| r.pauli)
}

/// Joint score of a flag set under shared output errors: the union of the
/// members' detections, penalized for every member's legs.
#[derive(Debug, Clone, Copy)]
pub struct SetScore {
    pub n_detected: f64,
    pub q: f64,
    pub detected_fraction: f64,
}

/// Scores a whole set by union detection: a fault counts once if any
/// member flags it.
pub fn quality_set(flags: &NestedFlagSet, set: &OutputErrorSet, m: &NoiseModel) -> SetScore {
    let images: Vec<Option<PauliString>> = flags
        .gadgets
        .iter()
        .map(|f| p_prime_at_end(set, f))
        .collect();
    let mut n_detected = 0.0;
    for err in &set.errors {
        let hit = flags
            .gadgets
            .iter()
            .zip(&images)
            .any(|(f, pp)| detects(set, f, pp, err));
        if hit {
            n_detected += err.rate_weight;
        }
    }
    let weight_sum: usize = flags
        .gadgets
        .iter()
        .map(|f| f.entangle.weight() + f.disentangle.weight())
        .sum();
    let q = n_detected - m.penalty_coefficient() * weight_sum as f64;
    let detected_fraction = if set.total_weight > 0.0 {
        n_detected / set.total_weight
    } else {
        0.0
    };
    SetScore {
        n_detected,
        q,
        detected_fraction,
    }
}

/// Per-error detection verdicts for one flag, aligned with `set.errors`.
pub fn detection_mask(flag: &FlagGadget, set: &OutputErrorSet) -> Vec<bool> {
    let pp = p_prime_at_end(set, flag);
    set.errors
        .iter()
        .map(|e| detects(set, flag, &pp, e))
        .collect()
}

/// Scores one flag: rate-weighted detections minus the per-leg penalty.
/// The error set must come from the uninstrumented circuit; the penalty
/// term stands in for the gadget's own fault locations.
pub fn quality(flag: &FlagGadget, set: &OutputErrorSet, m: &NoiseModel) -> FlagScore {
    let s = quality_set(&NestedFlagSet::single(flag.clone()), set, m);
    FlagScore {
        flag: flag.clone(),
        n_detected: s.n_detected,
        q: s.q,
        detected_fraction: s.detected_fraction,
    }
}

/// Result of ranking a candidate list: scored flags best-first, plus the
/// candidates the section rejected.
#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub scores: Vec<FlagScore>,
    pub incompatible: Vec<(PauliString, CompatibilityViolation)>,
}

fn sort_scores(scores: &mut [FlagScore]) {
    scores.sort_by(|a, b| {
        b.q.total_cmp(&a.q)
            .then_with(|| {
                let wa = a.flag.entangle.weight() + a.flag.disentangle.weight();
                let wb = b.flag.entangle.weight() + b.flag.disentangle.weight();
                wa.cmp(&wb)
            })
            .then_with(|| a.flag.entangle.to_string().cmp(&b.flag.entangle.to_string()))
            .then_with(|| {
                a.flag
                    .disentangle
                    .to_string()
                    .cmp(&b.flag.disentangle.to_string())
            })
    });
}

/// Synthesizes and scores every candidate over `section`, sorting by q
/// descending (ties: lower total weight, then Pauli text). Incompatible
/// candidates are reported, not failed.
pub fn rank_flags(
    c: &Circuit,
    candidates: &[PauliString],
    section: Range<usize>,
    m: &NoiseModel,
) -> Result<RankOutcome> {
    rank_flags_scored(c, candidates, section, m, false)
}

/// [`rank_flags`] with a choice of scorer: the Eq.-style windowed count, or
/// the slower exact mode that enumerates the instrumented circuit's own
/// fault locations (gadget legs included).
pub fn rank_flags_scored(
    c: &Circuit,
    candidates: &[PauliString],
    section: Range<usize>,
    m: &NoiseModel,
    exact: bool,
) -> Result<RankOutcome> {
    enum Item {
        Scored(FlagScore),
        Rejected(PauliString, CompatibilityViolation),
    }
    let set = output_error_set(c, m)?;
    let results: Vec<Item> = candidates
        .par_iter()
        .map(|cand| match synthesize(c, cand, section.clone()) {
            Ok(flag) => {
                let score = if exact {
                    quality_exact(c, &flag, m)?
                } else {
                    quality(&flag, &set, m)
                };
                Ok(Item::Scored(score))
            }
            Err(Error::Incompatible { .. }) => {
                let report = check_compatibility(c, &cand.abs(), section.start, section.end)?;
                let violation = report
                    .violation
                    .expect("synthesis failed, so a violation exists");
                Ok(Item::Rejected(cand.clone(), violation))
            }
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<Item>>>()?;
    let mut scores = Vec::new();
    let mut incompatible = Vec::new();
    for r in results {
        match r {
            Item::Scored(s) => scores.push(s),
            Item::Rejected(cand, v) => incompatible.push((cand, v)),
        }
    }
    sort_scores(&mut scores);
    Ok(RankOutcome {
        scores,
        incompatible,
    })
}

/// One enumerable fault of an instrumented circuit with its propagated
/// output and the per-ancilla detection verdicts (Z-component on each
/// ancilla flips its X-basis measurement).
#[derive(Debug, Clone)]
pub struct InstrumentedFault {
    pub location_index: usize,
    pub moment: usize,
    pub fault: PauliString,
    /// `None` when a non-Clifford gate blocks the propagation.
    pub output: Option<PauliString>,
    pub detected_by: Vec<bool>,
    pub rate_weight: f64,
}

impl InstrumentedFault {
    pub fn detected(&self) -> bool {
        self.detected_by.iter().any(|&d| d)
    }
}

/// Enumerates every fault of the instrumented circuit — gadget legs
/// included — and marks which ancillas catch it.
pub fn enumerate_instrumented_faults(
    c_instrumented: &Circuit,
    flags: &NestedFlagSet,
    m: &NoiseModel,
) -> Result<Vec<InstrumentedFault>> {
    let ancillas = flags.ancillas();
    for &a in &ancillas {
        if a >= c_instrumented.width() {
            return Err(Error::InvalidArgument(format!(
                "ancilla {a} outside the instrumented register of width {}",
                c_instrumented.width()
            )));
        }
    }
    let locations = fault_locations(c_instrumented, m)?;
    let end = c_instrumented.num_moments();
    let mut out = Vec::new();
    for (idx, loc) in locations.iter().enumerate() {
        for fault in loc.fault_operators(c_instrumented.width()) {
            let entry = match propagate(c_instrumented, &fault, loc.moment + 1, end) {
                Ok(r) => {
                    let detected_by = ancillas
                        .iter()
                        .map(|&a| r.pauli.z_mask() >> a & 1 == 1)
                        .collect();
                    InstrumentedFault {
                        location_index: idx,
                        moment: loc.moment,
                        fault,
                        output: Some(r.pauli),
                        detected_by,
                        rate_weight: loc.rate_weight,
                    }
                }
                Err(Error::Incompatible { .. }) => InstrumentedFault {
                    location_index: idx,
                    moment: loc.moment,
                    fault,
                    output: None,
                    detected_by: vec![false; ancillas.len()],
                    rate_weight: loc.rate_weight,
                },
                Err(e) => return Err(e),
            };
            out.push(entry);
        }
    }
    Ok(out)
}

fn total_fault_weight(c: &Circuit, m: &NoiseModel) -> Result<f64> {
    Ok(fault_locations(c, m)?
        .iter()
        .map(|l| l.total_weight(c.width()))
        .sum())
}

/// Exact-mode score for a whole flag set: instruments the circuit,
/// enumerates its full fault set (so gadget self-faults and their partial
/// self-detection are counted), and charges the actual weight of added
/// fault locations instead of the per-weight heuristic.
pub fn quality_set_exact(c: &Circuit, flags: &NestedFlagSet, m: &NoiseModel) -> Result<SetScore> {
    let instr = instrument(c, flags)?;
    let instr = if m.kind == NoiseKind::Overrotation {
        compile_to_native(&instr)?
    } else {
        instr
    };
    let faults = enumerate_instrumented_faults(&instr, flags, m)?;
    let n_detected: f64 = faults
        .iter()
        .filter(|f| f.detected())
        .map(|f| f.rate_weight)
        .sum();
    let total_instr: f64 = faults.iter().map(|f| f.rate_weight).sum();
    let total_raw = total_fault_weight(c, m)?;
    let q = n_detected - (total_instr - total_raw);
    let detected_fraction = if total_instr > 0.0 {
        n_detected / total_instr
    } else {
        0.0
    };
    Ok(SetScore {
        n_detected,
        q,
        detected_fraction,
    })
}

/// [`quality_set_exact`] for a single flag.
pub fn quality_exact(c: &Circuit, flag: &FlagGadget, m: &NoiseModel) -> Result<FlagScore> {
    let s = quality_set_exact(c, &NestedFlagSet::single(flag.clone()), m)?;
    Ok(FlagScore {
        flag: flag.clone(),
        n_detected: s.n_detected,
        q: s.q,
        detected_fraction: s.detected_fraction,
    })
}

/// Returns `c` with the fault operator inserted directly after the given
/// moment (before any later gate on the same qubits).
pub fn inject_fault(c: &Circuit, moment: usize, fault: &PauliString) -> Result<Circuit> {
    if moment >= c.num_moments() {
        return Err(Error::InvalidArgument(format!(
            "fault moment {moment} exceeds the circuit's {} moments",
            c.num_moments()
        )));
    }
    if fault.num_qubits() != c.width() {
        return Err(Error::DimensionMismatch(fault.num_qubits(), c.width()));
    }
    let mut out = Circuit::new(c.width());
    for (t, gates) in c.moments().iter().enumerate() {
        for g in gates {
            out.push(g.clone())?;
        }
        if t == moment {
            for g in pauli_gates(fault) {
                out.push(g)?;
            }
        }
    }
    Ok(out)
}
