//! Factorized block encodings of vibrational and vibronic Hamiltonians.
//!
//! Coefficient tensors are stored as [`symtensor::SymTensor`], decomposed
//! with symmetric CP or Tucker ([`decomp`]), assembled into models
//! ([`hamiltonian`]) and costed as LCU block encodings for qubitized phase
//! estimation ([`costmodel`], [`budget`]). [`oracle`] builds dense matrices
//! of small models for cross-checking.

pub mod budget;
pub mod costmodel;
pub mod decomp;
pub mod error;
pub mod hamiltonian;
mod linalg;
pub mod methods;
pub mod oracle;
pub mod symtensor;

pub use error::{Error, Result};
