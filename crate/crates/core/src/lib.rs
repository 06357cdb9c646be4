//! Disordered, dissipative qubit-cavity chains.
//!
//! Builds the restricted non-Hermitian Hamiltonians of dimer and trimer
//! chains with quenched bond disorder, computes real-space winding numbers,
//! fiducial-qubit coherence traces and complex spectra, and evaluates the
//! closed-form localization lengths that locate the phase boundaries.

pub mod analytics;
pub mod dynamics;
pub mod lindblad;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod ode;
pub mod seed;
pub mod stats;
pub mod sweep;
pub mod topology;
pub mod validate;

pub use matrix::{ComplexMatrix, MatrixError};
pub use model::{BondNoise, ChainKind, DisorderSpec, ModelSpec};
pub use seed::derive_seed;
