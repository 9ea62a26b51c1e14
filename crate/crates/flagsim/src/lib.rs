//! Synthesis, ranking, and density-matrix evaluation of Pauli flag gadgets
//! for error detection in Clifford and near-Clifford circuits.
//!
//! The crate is organized bottom-up:
//!
//! - [`pauli`]: signed Pauli strings with exact quarter-phase products.
//! - [`circuit`]: a moment-packed gate IR with a plain-text format.
//! - [`dense`]: small dense unitaries used as the ground-truth oracle.
//! - [`native`]: compilation onto an `rx`/`ry`/`rz`/`xx` native gate set.
//! - [`benchmarks`]: built-in circuits the experiments run on.
//! - [`propagate`]: sign-exact Clifford conjugation and compatibility scans.
//! - [`gadget`]: flag-gadget synthesis and circuit instrumentation.
//! - [`fault`]: fault enumeration, detection combinatorics, and ranking.
//! - [`densesim`]: density-matrix simulation with noise and postselection.
//! - [`experiment`]: seeded end-to-end sweeps that write CSV reports.

pub mod benchmarks;
pub mod circuit;
pub mod dense;
pub mod densesim;
pub mod error;
pub mod experiment;
pub mod fault;
pub mod gadget;
pub mod native;
pub mod pauli;
pub mod propagate;

pub use circuit::{Circuit, Gate, GateKind};
pub use densesim::{
    evaluate_flagged, fidelity, flag_survival, postselect_flags, simulate, simulate_from,
    SimOutcome,
};
pub use error::{Error, Result};
pub use experiment::{
    draw_candidates, draw_pairs, explain_flag, rank_csv_string, rank_records, records_csv_string,
    resolve_circuit, run_pair_experiment, run_rank, run_single_flag_experiment, ExperimentConfig,
    ExperimentRecord, ExperimentReport, RankRecord,
};
pub use fault::{
    fault_locations, inject_fault, output_error_set, quality, quality_exact, quality_set,
    rank_flags, rank_flags_scored, FaultLocation, FlagScore, NoiseKind, NoiseModel,
    OutputErrorSet, RankOutcome,
};
pub use gadget::{
    instrument, instrument_with_injected_faults, synthesize, FlagGadget, NestedFlagSet,
    NestingViolation,
};
pub use pauli::{Pauli, PauliString, PhasedPauli};
pub use propagate::{
    check_compatibility, conjugate_through_gate, disentangling_operator, propagate,
    CompatibilityReport, CompatibilityViolation, PropagationResult,
};
