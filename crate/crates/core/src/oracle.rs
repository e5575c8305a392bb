//! Dense-matrix reference computations.
//!
//! Everything here works on explicit `2^N × 2^N` matrices and brute-force
//! enumeration, sharing no code path with the symbolic hierarchy. Tests and
//! the `verify` subcommand compare the two.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::hamiltonian::SpinHamiltonian;
use crate::hierarchy::downstream;
use crate::pauli::{Axis, PauliString};
use crate::Result;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 2×2 Pauli matrix for an axis, or the identity for `None`.
pub fn pauli_matrix(axis: Option<Axis>) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let data = match axis {
        None => [one, z, z, one],
        Some(Axis::X) => [z, one, one, z],
        Some(Axis::Y) => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        Some(Axis::Z) => [one, z, z, -one],
    };
    CMatrix::from_row_slice(2, 2, &data)
}

/// Dense matrix of a Pauli string; site 1 is the leftmost Kronecker factor.
pub fn string_matrix(s: &PauliString, n_qubits: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for site in 1..=n_qubits {
        m = m.kronecker(&pauli_matrix(s.axis_at(site)));
    }
    m
}

/// Dense matrix of the two-body Hamiltonian, built term by term.
pub fn hamiltonian_matrix(h: &SpinHamiltonian) -> CMatrix {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for site in 1..=n {
        for axis in Axis::ALL {
            let coeff = h.h(site, axis);
            if coeff != 0.0 {
                m += string_matrix(&PauliString::single(site, axis), n) * c(0.5 * coeff, 0.0);
            }
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for mu in Axis::ALL {
                for nu in Axis::ALL {
                    let coeff = h.v(i, j, mu, nu);
                    if coeff != 0.0 {
                        let s = PauliString::new([(i, mu), (j, nu)]).expect("distinct sites");
                        m += string_matrix(&s, n) * c(0.25 * coeff, 0.0);
                    }
                }
            }
        }
    }
    m
}

/// Pauli-basis coefficients of `i[H, σ]`, i.e. of `d/dt σ` in the Heisenberg
/// picture, with entries of magnitude below `drop_below` removed.
pub fn commutator_expansion(
    h: &SpinHamiltonian,
    s: &PauliString,
    drop_below: f64,
) -> BTreeMap<PauliString, f64> {
    let n = h.n_qubits();
    let hm = hamiltonian_matrix(h);
    let sm = string_matrix(s, n);
    let comm = (&hm * &sm - &sm * &hm) * c(0.0, 1.0);
    pauli_coefficients(&comm, n, drop_below)
}

/// Expansion of a Hermitian matrix in the Pauli basis via `Tr(P M) / 2^N`.
pub fn pauli_coefficients(m: &CMatrix, n_qubits: usize, drop_below: f64) -> BTreeMap<PauliString, f64> {
    let dim = (1usize << n_qubits) as f64;
    let mut out = BTreeMap::new();
    for p in PauliString::enumerate(n_qubits) {
        let pm = string_matrix(&p, n_qubits);
        let coeff = (&pm * m).trace() / dim;
        if coeff.re.abs() >= drop_below {
            out.insert(p, coeff.re);
        }
    }
    out
}

/// Upstream sets by inverting downstream over every non-identity string.
pub fn brute_force_upstream(h: &SpinHamiltonian) -> Result<BTreeMap<PauliString, BTreeSet<PauliString>>> {
    let n = h.n_qubits();
    let mut inverse: BTreeMap<PauliString, BTreeSet<PauliString>> = BTreeMap::new();
    for a in PauliString::enumerate(n).skip(1) {
        inverse.entry(a.clone()).or_default();
        for b in downstream(h, &a)? {
            inverse.entry(b).or_default().insert(a.clone());
        }
    }
    Ok(inverse)
}

/// Component sizes of the hierarchy graph with edges taken from the dense
/// commutator expansion (breadth-first search, no union-find).
pub fn brute_force_components(h: &SpinHamiltonian, drop_below: f64) -> Vec<usize> {
    let n = h.n_qubits();
    let strings: Vec<PauliString> = PauliString::enumerate(n).collect();
    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); strings.len()];
    for (a, s) in strings.iter().enumerate() {
        for t in commutator_expansion(h, s, drop_below).keys() {
            let b = t.to_index(n);
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
    }
    let mut seen = vec![false; strings.len()];
    let mut sizes = Vec::new();
    for start in 0..strings.len() {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut size = 0;
        while let Some(x) = stack.pop() {
            size += 1;
            for &y in &adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    sizes
}

/// Frobenius norm of `[A, B]`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}
