//! Simulation toolkit for bucket-brigade quantum RAM under noise.
//!
//! The crate is organized around a small exact simulation engine
//! ([`simcore`]) and five domain layers built on top of it:
//!
//! - [`bb_circuit`] — explicit bucket-brigade lookup circuit (CNOT/Toffoli
//!   routing tree), lookup execution and gate-activation accounting.
//! - [`path_model`] — the stochastic routing-error model with closed-form
//!   right-path / wrong-path / no-path probabilities and Monte Carlo
//!   estimation.
//! - [`oracle_channels`] — noisy memory-query channels: perfect bit/phase
//!   oracles, the Regev–Schiff lost-query channel, multi-qubit bit-flip
//!   channels and their compositions.
//! - [`grover`] — Grover search driven through a pluggable (possibly faulty)
//!   oracle channel, with exact mixed-state evolution, trajectory sampling
//!   and scaling experiments.
//! - [`qec`] — repetition-code query-error-correction experiments and CSS
//!   codestate tooling.
//!
//! All registers use a big-endian basis convention: qubit 0 is the most
//! significant bit of a basis index. States are immutable values; operations
//! return new states. Randomness is always passed in explicitly, and Monte
//! Carlo drivers derive one counter-based substream per trial so results do
//! not depend on worker count.

pub mod bb_circuit;
pub mod grover;
pub mod oracle_channels;
pub mod path_model;
pub mod qec;
pub mod simcore;

pub use simcore::{TOL_CONSTRUCT, TOL_EQ};
