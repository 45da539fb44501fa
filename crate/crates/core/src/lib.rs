//! Incoherent quantum channels in Liouville space.
//!
//! The crate builds random-unitary superoperators from distributions of
//! control-parameter deviations, simulates process tomography with
//! system–environment correlated inputs, and recovers the deviation
//! distribution from a superoperator's eigenvalue spectrum.

pub mod channels;
pub mod error;
pub mod fixtures;
pub mod liouville;
pub mod matrix;
pub mod nonuniform_ft;
pub mod pauli;
pub mod spectral;
pub mod tomography;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
