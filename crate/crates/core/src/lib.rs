//! Exact-diagonalization toolkit for finite 1D non-reciprocal tight-binding
//! chains: Hamiltonian assembly under open/twisted boundary conditions,
//! dense non-Hermitian spectra, PBC spectral loops traced over the twist
//! angle, point-gap winding numbers, and eigenstate classification
//! (skin / defect / hybrid / edge / extended).

pub mod builders;
pub mod classify;
mod error;
pub mod lattice;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use lattice::{BoundaryCondition, Diagnostic, HamiltonianMatrix, Hopping, LatticeSpec};

pub use num_complex::Complex64;
