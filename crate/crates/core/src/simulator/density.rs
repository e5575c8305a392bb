use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// A computational basis state, site 1 first (`"0101"` puts site 1 in `|0⟩`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    bits: Vec<bool>,
}

impl BasisState {
    pub fn parse(label: &str) -> Result<Self> {
        let bits = label
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("basis label `{label}` must contain only 0/1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::invalid("empty basis label"));
        }
        Ok(Self { bits })
    }

    /// Alternating `0101…` on `n` sites.
    pub fn alternating(n: usize) -> Self {
        Self { bits: (0..n).map(|k| k % 2 == 1).collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.bits.len()
    }

    /// Register index with site 1 as the most significant bit.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// Exact `⟨P⟩`: nonzero only for strings made of Z factors.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let mut value = 1.0;
        for &(site, axis) in p.factors() {
            if axis != crate::pauli::Axis::Z {
                return 0.0;
            }
            if self.bits[site - 1] {
                value = -value;
            }
        }
        value
    }

    pub fn label(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Row-major `2^N × 2^N` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure_basis(state: &BasisState) -> Self {
        let n_qubits = state.n_qubits();
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        let k = state.index();
        data[k * dim + k] = Complex64::new(1.0, 0.0);
        Self { n_qubits, dim, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    fn bit(&self, site: usize) -> usize {
        1usize << (self.n_qubits - site)
    }

    /// Offsets of the `2^k` local basis states of `sites` (first site most
    /// significant), and the mask of those bits.
    fn local_offsets(&self, sites: &[usize]) -> (Vec<usize>, usize) {
        let k = sites.len();
        let mut mask = 0;
        for &s in sites {
            mask |= self.bit(s);
        }
        let offsets = (0..(1usize << k))
            .map(|local| {
                sites.iter().enumerate().fold(0, |acc, (pos, &s)| {
                    if local & (1 << (k - 1 - pos)) != 0 {
                        acc | self.bit(s)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        (offsets, mask)
    }

    /// `ρ ← U ρ U†` for a `2^k × 2^k` unitary on `sites` (ascending order).
    pub fn apply_unitary(&mut self, sites: &[usize], u: &DMatrix<Complex64>) {
        let (offsets, mask) = self.local_offsets(sites);
        let size = offsets.len();
        debug_assert_eq!(u.nrows(), size);
        let dim = self.dim;
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        // Left multiplication, column by column.
        for col in 0..dim {
            for base in (0..dim).filter(|b| b & mask == 0) {
                for (a, &off) in offsets.iter().enumerate() {
                    buf[a] = self.data[(base | off) * dim + col];
                }
                for (a, &off) in offsets.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (b, v) in buf.iter().enumerate() {
                        acc += u[(a, b)] * v;
                    }
                    self.data[(base | off) * dim + col] = acc;
                }
            }
        }
        // Right multiplication by U†, row by row.
        for row in 0..dim {
            let line = &mut self.data[row * dim..(row + 1) * dim];
            for base in (0..dim).filter(|b| b & mask == 0) {
                for (a, &off) in offsets.iter().enumerate() {
                    buf[a] = line[base | off];
                }
                for (a, &off) in offsets.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (b, v) in buf.iter().enumerate() {
                        acc += v * u[(a, b)].conj();
                    }
                    line[base | off] = acc;
                }
            }
        }
    }

    /// Depolarizing channel `(1-p) ρ + p/(4^k-1) Σ_{P≠I} P ρ P` on `sites`.
    ///
    /// Uses `4^{-k} Σ_P P ρ P = I/2^k ⊗ Tr_sites ρ`.
    pub fn depolarize(&mut self, sites: &[usize], p: f64) {
        if p == 0.0 || sites.is_empty() {
            return;
        }
        let (offsets, mask) = self.local_offsets(sites);
        let size = offsets.len() as f64;
        let paulis = size * size - 1.0;
        let keep = 1.0 - p - p / paulis;
        let mix = p * size * size / paulis / size;
        let dim = self.dim;
        for row_base in (0..dim).filter(|b| b & mask == 0) {
            for col_base in (0..dim).filter(|b| b & mask == 0) {
                let traced: Complex64 = offsets
                    .iter()
                    .map(|&off| self.data[(row_base | off) * dim + (col_base | off)])
                    .sum();
                for &ro in &offsets {
                    for &co in &offsets {
                        let idx = (row_base | ro) * dim + (col_base | co);
                        let mut value = self.data[idx] * keep;
                        if ro == co {
                            value += traced * mix;
                        }
                        self.data[idx] = value;
                    }
                }
            }
        }
    }

    /// `Tr(ρ P)`.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let (flip, z_mask, y_count) = p.basis_action(self.n_qubits);
        let dim = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            let c = a ^ flip;
            // ⟨a|P|c⟩ ρ_{c a}
            acc += PauliString::basis_phase(c, z_mask, y_count) * self.data[c * dim + a];
        }
        acc.re
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Largest `|ρ_ab − conj(ρ_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim;
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in a..dim {
                worst = worst.max((self.data[a * dim + b] - self.data[b * dim + a].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let hermitian = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(hermitian).eigenvalues.min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::string_matrix;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn basis_expectations_follow_site_convention() {
        let state = BasisState::parse("0101").unwrap();
        assert_eq!(state.index(), 0b0101);
        let rho = DensityMatrix::pure_basis(&state);
        assert_eq!(rho.expectation(&p("Z1")), 1.0);
        assert_eq!(rho.expectation(&p("Z2")), -1.0);
        assert_eq!(rho.expectation(&p("Z2 Z4")), 1.0);
        assert_eq!(rho.expectation(&p("X1")), 0.0);
        assert_eq!(state.expectation(&p("Z1 Z2")), -1.0);
    }

    #[test]
    fn unitary_matches_dense_conjugation() {
        let state = BasisState::parse("011").unwrap();
        let mut rho = DensityMatrix::pure_basis(&state);
        // exp(-i 0.4 X1 Y3) applied through the two-site kernel.
        let gen = string_matrix(&p("X1 Y2"), 2);
        let u = crate::linalg::expm_hermitian(&gen, 0.4);
        let dense_gen = string_matrix(&p("X1 Y3"), 3);
        let dense_u = crate::linalg::expm_hermitian(&dense_gen, 0.4);
        let expected = &dense_u * rho.to_matrix() * dense_u.adjoint();
        rho.apply_unitary(&[1, 3], &u);
        assert!((rho.to_matrix() - expected).norm() < 1e-13);
    }

    #[test]
    fn depolarizing_matches_pauli_sum() {
        let state = BasisState::parse("10").unwrap();
        let mut rho = DensityMatrix::pure_basis(&state);
        let u = crate::linalg::expm_hermitian(&string_matrix(&p("X1 Y2"), 2), 0.3);
        rho.apply_unitary(&[1, 2], &u);
        let before = rho.to_matrix();
        let prob = 0.2;
        let mut expected = &before * Complex64::new(1.0 - prob, 0.0);
        for q in PauliString::enumerate(1).skip(1) {
            let pm = string_matrix(&q, 1).kronecker(&string_matrix(&PauliString::identity(), 1));
            expected += &pm * &before * &pm * Complex64::new(prob / 3.0, 0.0);
        }
        rho.depolarize(&[1], prob);
        assert!((rho.to_matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn full_depolarization_is_maximally_mixed() {
        let mut rho = DensityMatrix::pure_basis(&BasisState::parse("01").unwrap());
        rho.depolarize(&[1, 2], 15.0 / 16.0);
        for a in 0..4 {
            assert!((rho.get(a, a).re - 0.25).abs() < 1e-15);
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }
}
