//! Eleven exactly-solvable position-dependent-mass quantum systems: a
//! machine-readable catalog, their 1D reductions, an independent
//! finite-difference eigensolver, closed-form spectra with adjudication
//! against that oracle, and numerical verification of the symmetry, Casimir,
//! and factorization identities the closed forms rest on.

pub mod catalog;
pub mod claims;
pub mod error;
pub mod expr;
pub mod grid;
pub mod hamiltonian;
pub mod separation;
pub mod specfun;
pub mod spectra;
pub mod sturm;
pub mod verify;

pub use error::{CoreError, Result};
