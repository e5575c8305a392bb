use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::mitigation::ObservableCombination;
use crate::oracle::hamiltonian_matrix;
use crate::pauli::PauliString;

use super::density::BasisState;

/// Default largest register for dense diagonalization.
pub const DEFAULT_EXACT_CAP: usize = 10;

fn pauli_expectation(psi: &DVector<Complex64>, p: &PauliString, n_qubits: usize) -> f64 {
    let (flip, z_mask, y_count) = p.basis_action(n_qubits);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, amp) in psi.iter().enumerate() {
        // P|b⟩ = phase(b) |b ^ flip⟩
        acc += psi[b ^ flip].conj() * PauliString::basis_phase(b, z_mask, y_count) * amp;
    }
    acc.re
}

/// Noise-free observable expectations `[observable][time]` from dense
/// diagonalization of the Hamiltonian.
pub fn evolve_exact(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    times: &[f64],
    observables: &[ObservableCombination],
) -> Result<Vec<Vec<f64>>> {
    evolve_exact_with_cap(hamiltonian, initial, times, observables, DEFAULT_EXACT_CAP)
}

pub fn evolve_exact_with_cap(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    times: &[f64],
    observables: &[ObservableCombination],
    max_qubits: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = hamiltonian.n_qubits();
    if n > max_qubits {
        return Err(Error::ResourceLimit(format!(
            "dense diagonalization on {n} qubits exceeds the cap of {max_qubits}"
        )));
    }
    if initial.n_qubits() != n {
        return Err(Error::invalid("initial state and Hamiltonian sizes differ"));
    }
    for obs in observables {
        for (_, s) in &obs.weighted_strings {
            s.check_sites(n)?;
        }
    }
    let eig = SymmetricEigen::new(hamiltonian_matrix(hamiltonian));
    let vectors = eig.eigenvectors;
    let dim = 1usize << n;
    let mut psi0 = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    psi0[initial.index()] = Complex64::new(1.0, 0.0);
    let coefficients = vectors.adjoint() * psi0;

    let mut out = vec![Vec::with_capacity(times.len()); observables.len()];
    for &t in times {
        let phased = DVector::from_iterator(
            dim,
            coefficients
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        let psi = &vectors * phased;
        for (k, obs) in observables.iter().enumerate() {
            out[k].push(obs.evaluate(|s| Some(pauli_expectation(&psi, s, n)))?);
        }
    }
    Ok(out)
}
