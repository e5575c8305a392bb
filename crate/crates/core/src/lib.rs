//! BBGKY-constrained zero-noise extrapolation.
//!
//! The crate is organised around the pipeline it implements:
//!
//! - [`pauli`] and [`hamiltonian`]: Pauli strings and two-body spin Hamiltonians.
//! - [`hierarchy`]: symbolic derivation of the equation of motion of any Pauli
//!   string expectation, upstream/downstream connections, radius-`r` subsets
//!   and the connected-component decomposition of the full hierarchy.
//! - [`simulator`]: density-matrix simulation of Trotterized evolution with a
//!   depolarizing noise model, unitary folding, shot sampling and an exact
//!   (dense diagonalization) reference.
//! - [`mitigation`]: Bernstein-derivative constraints, assembly and minimum-norm
//!   solution of the joint least-squares problem, error propagation and
//!   accumulated error norms.
//! - [`schwinger`]: the lattice Schwinger model and the parameter-scan driver.
//!
//! Site convention: site 1 is the leftmost tensor factor and `σ^3|0⟩ = +|0⟩`,
//! so the basis label `"0101"` puts site 1 in `|0⟩`.

pub mod error;
pub mod hamiltonian;
pub mod hierarchy;
pub mod linalg;
pub mod mitigation;
pub mod oracle;
pub mod parallel;
pub mod pauli;
pub mod schwinger;
pub mod simulator;

pub use error::{Error, Result};
pub use hamiltonian::SpinHamiltonian;
pub use hierarchy::{BbgkyEquation, HierarchySubset};
pub use parallel::Execution;
pub use pauli::{Axis, PauliString};
