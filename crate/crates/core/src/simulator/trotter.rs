use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::linalg::expm_hermitian;
use crate::oracle::pauli_matrix;
use crate::pauli::Axis;

/// One Hamiltonian term exponentiated as a single factor.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorTerm {
    /// `1/2 Σ_μ h^μ σ_site^μ`
    Field { site: usize, h: [f64; 3] },
    /// `1/4 Σ_{μν} V^{μν} σ_i^μ σ_j^ν`, `i < j`
    Coupling { i: usize, j: usize, v: [[f64; 3]; 3] },
}

/// `exp(-i · duration · term)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterFactor {
    pub term: FactorTerm,
    pub duration: f64,
}

impl TrotterFactor {
    pub fn sites(&self) -> Vec<usize> {
        match self.term {
            FactorTerm::Field { site, .. } => vec![site],
            FactorTerm::Coupling { i, j, .. } => vec![i, j],
        }
    }

    pub fn arity(&self) -> usize {
        match self.term {
            FactorTerm::Field { .. } => 1,
            FactorTerm::Coupling { .. } => 2,
        }
    }

    /// Local Hermitian generator on the factor's sites (first site most significant).
    pub fn generator(&self) -> DMatrix<Complex64> {
        match &self.term {
            FactorTerm::Field { h, .. } => {
                let mut m = DMatrix::zeros(2, 2);
                for axis in Axis::ALL {
                    m += pauli_matrix(Some(axis)) * Complex64::new(0.5 * h[axis.slot()], 0.0);
                }
                m
            }
            FactorTerm::Coupling { v, .. } => {
                let mut m = DMatrix::zeros(4, 4);
                for mu in Axis::ALL {
                    for nu in Axis::ALL {
                        let c = v[mu.slot()][nu.slot()];
                        if c != 0.0 {
                            m += pauli_matrix(Some(mu)).kronecker(&pauli_matrix(Some(nu)))
                                * Complex64::new(0.25 * c, 0.0);
                        }
                    }
                }
                m
            }
        }
    }

    pub fn unitary(&self) -> DMatrix<Complex64> {
        expm_hermitian(&self.generator(), self.duration)
    }
}

/// Factor sequence of one Trotter step of length `dt`.
///
/// Order 1 is one pass over the nonzero one-site terms (ascending site) and
/// then the nonzero two-site terms (ascending `(i, j)`); order 2 is the same
/// pass with half durations followed by its reversal.
pub fn trotter_factors(hamiltonian: &SpinHamiltonian, dt: f64, order: u8) -> Result<Vec<TrotterFactor>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step {dt} must be positive")));
    }
    let pass = |duration: f64| -> Vec<TrotterFactor> {
        let fields = (1..=hamiltonian.n_qubits()).filter_map(|site| {
            let h = hamiltonian.site_field(site);
            h.iter().any(|&x| x != 0.0).then_some(TrotterFactor {
                term: FactorTerm::Field { site, h },
                duration,
            })
        });
        let couplings = hamiltonian.pairs().filter_map(|(i, j)| {
            let v = hamiltonian.pair_coupling(i, j);
            v.iter().flatten().any(|&x| x != 0.0).then_some(TrotterFactor {
                term: FactorTerm::Coupling { i, j, v },
                duration,
            })
        });
        fields.chain(couplings).collect()
    };
    match order {
        1 => Ok(pass(dt)),
        2 => {
            let forward = pass(0.5 * dt);
            let mut sequence = forward.clone();
            sequence.extend(forward.into_iter().rev());
            Ok(sequence)
        }
        _ => Err(Error::invalid(format!("unsupported Trotter order {order}; use 1 or 2"))),
    }
}
