//! Two-body spin-1/2 Hamiltonians
//! `H = 1/2 Σ_i h_i^μ σ_i^μ + 1/4 Σ_{i<j} V_ij^{μν} σ_i^μ σ_j^ν`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Axis;

/// One-site fields `h` and two-site couplings `V` (upper triangle only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinHamiltonian {
    n_qubits: usize,
    /// `fields[i-1][μ-1] = h_i^μ`
    fields: Vec<[f64; 3]>,
    /// Row-major upper triangle: entry for `i < j` at [`pair_index`](Self::pair_index).
    couplings: Vec<[[f64; 3]; 3]>,
}

impl SpinHamiltonian {
    /// The zero Hamiltonian on `n_qubits` sites.
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "a Hamiltonian needs at least one site");
        Self {
            n_qubits,
            fields: vec![[0.0; 3]; n_qubits],
            couplings: vec![[[0.0; 3]; 3]; n_qubits * (n_qubits - 1) / 2],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i < j && j <= self.n_qubits);
        let n = self.n_qubits;
        let (i0, j0) = (i - 1, j - 1);
        i0 * n - i0 * (i0 + 1) / 2 + (j0 - i0 - 1)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_qubits {
            return Err(Error::invalid(format!("site {site} out of range 1..={}", self.n_qubits)));
        }
        Ok(())
    }

    /// `h_site^axis`.
    pub fn h(&self, site: usize, axis: Axis) -> f64 {
        self.fields[site - 1][axis.slot()]
    }

    pub fn set_h(&mut self, site: usize, axis: Axis, value: f64) -> Result<()> {
        self.check_site(site)?;
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite field h_{site}^{}", axis.index())));
        }
        self.fields[site - 1][axis.slot()] = value;
        Ok(())
    }

    /// `V_ij^{μν}` for any `i ≠ j`; `V_ji^{νμ}` is the same stored entry as `V_ij^{μν}`.
    pub fn v(&self, i: usize, j: usize, mu: Axis, nu: Axis) -> f64 {
        if i == j {
            return 0.0;
        }
        if i < j {
            self.couplings[self.pair_index(i, j)][mu.slot()][nu.slot()]
        } else {
            self.couplings[self.pair_index(j, i)][nu.slot()][mu.slot()]
        }
    }

    pub fn set_v(&mut self, i: usize, j: usize, mu: Axis, nu: Axis, value: f64) -> Result<()> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(Error::invalid("coupling needs two distinct sites"));
        }
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite coupling V_{i}{j}")));
        }
        let (a, b, mu, nu) = if i < j { (i, j, mu, nu) } else { (j, i, nu, mu) };
        let k = self.pair_index(a, b);
        self.couplings[k][mu.slot()][nu.slot()] = value;
        Ok(())
    }

    /// Field vector of one site.
    pub fn site_field(&self, site: usize) -> [f64; 3] {
        self.fields[site - 1]
    }

    /// Coupling block of the pair `i < j`, indexed `[μ-1][ν-1]`.
    pub fn pair_coupling(&self, i: usize, j: usize) -> [[f64; 3]; 3] {
        self.couplings[self.pair_index(i, j)]
    }

    /// Pairs `(i, j)`, `i < j`, in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_qubits;
        (1..=n).flat_map(move |i| ((i + 1)..=n).map(move |j| (i, j)))
    }

    /// Largest absolute coefficient, used for scale-relative tolerances.
    pub fn max_abs_coefficient(&self) -> f64 {
        let h = self.fields.iter().flatten().fold(0.0f64, |m, &x| m.max(x.abs()));
        self.couplings
            .iter()
            .flatten()
            .flatten()
            .fold(h, |m, &x| m.max(x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_access_is_canonicalized() {
        let mut h = SpinHamiltonian::zero(4);
        h.set_v(3, 1, Axis::X, Axis::Z, 2.5).unwrap();
        assert_eq!(h.v(1, 3, Axis::Z, Axis::X), 2.5);
        assert_eq!(h.v(3, 1, Axis::X, Axis::Z), 2.5);
        assert_eq!(h.v(1, 3, Axis::X, Axis::Z), 0.0);
        assert_eq!(h.pair_coupling(1, 3)[2][0], 2.5);
    }

    #[test]
    fn pair_index_is_dense() {
        let h = SpinHamiltonian::zero(5);
        let indices: Vec<usize> = h.pairs().map(|(i, j)| h.pair_index(i, j)).collect();
        assert_eq!(indices, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_input() {
        let mut h = SpinHamiltonian::zero(2);
        assert!(h.set_h(3, Axis::X, 1.0).is_err());
        assert!(h.set_v(1, 1, Axis::X, Axis::X, 1.0).is_err());
        assert!(h.set_h(1, Axis::X, f64::NAN).is_err());
    }
}
