//! Minimal exact quantum simulation engine.
//!
//! Dense pure states and density operators, controlled-X-family gates,
//! Kraus channels and lossless mixtures of unitaries, Choi matrices as a
//! channel-equality witness, and projective measurement.

mod channel;
mod choi;
mod gate;
pub mod linalg;
mod measure;
mod register;
mod state;

pub use channel::{KrausChannel, UnitaryMixture};
pub use choi::{choi_of, ChoiMatrix, CHOI_MAX_DIM};
pub use gate::{apply_gate, GateKind, GateOp};
pub use measure::{
    collapse_onto, computational_projectors, measure_projectors, outcome_probabilities,
    parity_projectors,
};
pub use register::QubitRegister;
pub use state::QuantumState;

use thiserror::Error;

/// Tolerance for construction-time checks (normalization, trace
/// preservation, unitarity).
pub const TOL_CONSTRUCT: f64 = 1e-10;

/// Tolerance for equality assertions between exactly-computed quantities.
pub const TOL_EQ: f64 = 1e-12;

/// Bit mask selecting `qubit` in a basis index, big-endian: qubit 0 is the
/// most significant bit.
#[inline]
pub fn qubit_mask(width: usize, qubit: usize) -> usize {
    debug_assert!(qubit < width);
    1 << (width - 1 - qubit)
}

/// Value of `qubit` in the basis index `index`.
#[inline]
pub fn bit_of(index: usize, width: usize, qubit: usize) -> bool {
    index & qubit_mask(width, qubit) != 0
}

/// Basis index of a classical bit string, `bits[0]` most significant.
pub fn index_of_bits(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Bit string of a basis index, element 0 most significant.
pub fn bits_of_index(index: usize, width: usize) -> Vec<bool> {
    (0..width).map(|q| bit_of(index, width, q)).collect()
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("control and target qubits overlap (qubit {0})")]
    ControlTargetOverlap(usize),
    #[error("gate `{kind}` expects {expected} and got {got}")]
    GateArity {
        kind: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error("state is not normalized: {detail}")]
    NotNormalized { detail: String },
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("channel is not trace preserving (max deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("channel has no Kraus operators")]
    EmptyChannel,
    #[error("mixture weights invalid: {0}")]
    BadMixtureWeights(String),
    #[error("branch operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("Choi matrix of dimension {dim} exceeds the {max} limit")]
    ChoiDimension { dim: usize, max: usize },
    #[error("projectors do not resolve the identity (max deviation {0:.3e})")]
    BadProjectors(f64),
    #[error("projector {0} is not idempotent (max deviation {1:.3e})")]
    NotIdempotent(usize, f64),
    #[error("requested outcome {0} has probability {1:.3e} (below threshold)")]
    ZeroProbabilityBranch(usize, f64),
    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(String),
    #[error("register must contain at least one qubit")]
    EmptyRegister,
    #[error("operation requires a {expected} state")]
    WrongStateKind { expected: &'static str },
}

pub type Result<T> = std::result::Result<T, SimError>;
