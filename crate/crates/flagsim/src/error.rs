//! Error type shared across the library.

use crate::circuit::Gate;

/// Errors produced by circuit construction, propagation, gadget synthesis,
/// and simulation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Two operands act on registers of different sizes.
    #[error("dimension mismatch: {0} qubits vs {1} qubits")]
    DimensionMismatch(usize, usize),

    /// Text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A dense-matrix operation was requested above the width guard.
    #[error("width {width} exceeds the dense-matrix guard of {guard} qubits")]
    WidthGuard { width: usize, guard: usize },

    /// Conjugation was requested through a gate outside the Clifford group.
    #[error("gate {0} is not Clifford; Pauli conjugation is undefined")]
    NotClifford(String),

    /// A Pauli operator cannot pass a non-Clifford gate during propagation.
    #[error(
        "operator incompatible with non-Clifford gate {gate} at moment {moment}, qubit {qubit}"
    )]
    Incompatible {
        moment: usize,
        qubit: usize,
        gate: Box<Gate>,
    },

    /// A caller-supplied value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Post-selection was requested on a state with (near-)zero acceptance
    /// probability; the conditioned state is undefined.
    #[error("degenerate post-selection: survival probability {0:.3e} is below threshold")]
    DegeneratePostselection(f64),

    /// Rejection sampling of compatible flag candidates exhausted its draw
    /// budget before reaching the requested count.
    #[error(
        "candidate redraw cap exhausted: kept {kept} of {requested} after {draws} draws \
         ({rejected} incompatible)"
    )]
    RedrawCapExhausted {
        requested: usize,
        kept: usize,
        draws: usize,
        rejected: usize,
    },

    /// Filesystem or serialization failure in the experiment harness.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
