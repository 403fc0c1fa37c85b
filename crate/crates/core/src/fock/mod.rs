//! Truncated Fock-space representation of n-mode bosonic states.

mod gates;
mod matrix;
mod ops;
mod state;

pub use gates::{
    beamsplitter_gate, beamsplitter_generator, displacement_gate, displacement_generator,
    kerr_gate, kerr_generator, rotation_gate, rotation_generator, squeeze_gate,
    squeeze_generator,
};
pub use matrix::{OperatorMatrix, SparseOperator};
pub use ops::{commutator, ladder_matrices, number_matrix, quadrature_matrices};
pub use state::{apply_gate, expectation, FockState, ModeSelection};

pub(crate) use ops::check_cutoff;
pub(crate) use state::{inner, inner_re, ModeLayout};

/// Default number of Fock levels kept per mode.
pub const DEFAULT_CUTOFF: usize = 10;
