//! Equations of motion of Pauli-string expectations (the BBGKY hierarchy) for
//! two-body spin Hamiltonians.
//!
//! For a string `σ(A, μ)` with `n = |A|` the time derivative of its expectation
//! is a linear combination of `(n-1)`-, `n`- and `(n+1)`-point correlators:
//!
//! ```text
//! d/dt⟨Π σ_k^{μ_k}⟩ = Σ_{i≠j ∈ A} V_ij^{μ_i ν}/2 ε_{μ_j ν λ} ⟨σ_j^λ Π_{A∖{i,j}}⟩
//!                   + Σ_{i ∈ A}   h_i^λ ε_{μ_i λ ν}         ⟨σ_i^ν Π_{A∖{i}}⟩
//!                   + Σ_{i ∈ A, j ∉ A} V_ij^{μν}/2 ε_{μ_i μ λ} ⟨σ_i^λ σ_j^ν Π_{A∖{i}}⟩
//! ```
//!
//! A string `t` on the right-hand side of the equation of `s` is *downstream*
//! of `s`; `s` is then *upstream* of `t`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::pauli::{Axis, PauliString};

/// Merged coefficients below this magnitude are dropped.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-12;

/// Default largest register accepted by [`decompose`].
pub const DEFAULT_DECOMPOSE_CAP: usize = 6;

/// Levi-Civita symbol `ε_{abc}` on axes.
pub fn levi_civita(a: Axis, b: Axis, c: Axis) -> f64 {
    match (a.index(), b.index(), c.index()) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// The unique third axis `λ` with `ε_{μνλ} ≠ 0`.
pub fn levi_bar(mu: Axis, nu: Axis) -> Result<Axis> {
    if mu == nu {
        return Err(Error::invalid(format!(
            "levi_bar undefined for equal axes ({}, {})",
            mu.index(),
            nu.index()
        )));
    }
    Axis::from_index(6 - mu.index() - nu.index())
}

/// One term `coeff · ⟨string⟩` on the right-hand side of an equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub string: PauliString,
}

/// `d/dt ⟨lhs⟩ = Σ_k coeff_k ⟨string_k⟩`, terms in canonical string order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbgkyEquation {
    pub lhs: PauliString,
    pub terms: Vec<Term>,
}

impl BbgkyEquation {
    pub fn coefficient_of(&self, string: &PauliString) -> f64 {
        self.terms
            .binary_search_by(|t| t.string.cmp(string))
            .map_or(0.0, |pos| self.terms[pos].coeff)
    }

    pub fn rhs_strings(&self) -> impl Iterator<Item = &PauliString> {
        self.terms.iter().map(|t| &t.string)
    }
}

fn check_string(hamiltonian: &SpinHamiltonian, s: &PauliString) -> Result<()> {
    s.check_sites(hamiltonian.n_qubits())
}

/// Derives the equation of motion of `⟨s⟩` under `hamiltonian`.
///
/// The identity yields an empty equation.
pub fn derive_equation(hamiltonian: &SpinHamiltonian, s: &PauliString) -> Result<BbgkyEquation> {
    check_string(hamiltonian, s)?;
    let n_qubits = hamiltonian.n_qubits();
    let mut acc: BTreeMap<PauliString, f64> = BTreeMap::new();
    let mut add = |string: PauliString, c: f64| {
        if c != 0.0 {
            *acc.entry(string).or_insert(0.0) += c;
        }
    };

    let factors = s.factors();
    // (n-1)-point: i is absorbed, j is rotated.
    for &(i, mu_i) in factors {
        for &(j, mu_j) in factors {
            if i == j {
                continue;
            }
            let shorter = s.without(i);
            for nu in Axis::ALL {
                let v = hamiltonian.v(i, j, mu_i, nu);
                if v == 0.0 {
                    continue;
                }
                for lambda in Axis::ALL {
                    let e = levi_civita(mu_j, nu, lambda);
                    if e != 0.0 {
                        add(shorter.with(j, lambda), 0.5 * v * e);
                    }
                }
            }
        }
    }
    // n-point: single-site rotation by the field.
    for &(i, mu_i) in factors {
        for lambda in Axis::ALL {
            let h = hamiltonian.h(i, lambda);
            if h == 0.0 {
                continue;
            }
            for nu in Axis::ALL {
                let e = levi_civita(mu_i, lambda, nu);
                if e != 0.0 {
                    add(s.with(i, nu), h * e);
                }
            }
        }
    }
    // (n+1)-point: i is rotated, j outside the support is attached.
    for &(i, mu_i) in factors {
        for j in 1..=n_qubits {
            if s.axis_at(j).is_some() {
                continue;
            }
            for mu in Axis::ALL {
                for nu in Axis::ALL {
                    let v = hamiltonian.v(i, j, mu, nu);
                    if v == 0.0 {
                        continue;
                    }
                    for lambda in Axis::ALL {
                        let e = levi_civita(mu_i, mu, lambda);
                        if e != 0.0 {
                            add(s.with(i, lambda).with(j, nu), 0.5 * v * e);
                        }
                    }
                }
            }
        }
    }

    let terms: Vec<Term> = acc
        .into_iter()
        .filter(|(_, c)| c.abs() >= COEFFICIENT_TOLERANCE)
        .map(|(string, coeff)| Term { coeff, string })
        .collect();
    debug_assert!(terms.len() as f64 <= 81.0 * (n_qubits * n_qubits) as f64 / 8.0 + 1e-9);
    Ok(BbgkyEquation { lhs: s.clone(), terms })
}

/// Strings with a nonzero coefficient in the equation of `s`.
pub fn downstream(hamiltonian: &SpinHamiltonian, s: &PauliString) -> Result<BTreeSet<PauliString>> {
    Ok(derive_equation(hamiltonian, s)?
        .terms
        .into_iter()
        .map(|t| t.string)
        .collect())
}

/// Strings whose equation contains `target`.
pub fn upstream(hamiltonian: &SpinHamiltonian, target: &PauliString) -> Result<BTreeSet<PauliString>> {
    upstream_with_count(hamiltonian, target).map(|(set, _)| set)
}

/// [`upstream`] plus the number of candidate strings examined, which never
/// exceeds `2n + 2n(n-1) + 6n(N_Q-n) ≤ 9 N_Q²/4` for `n = |target|`.
pub fn upstream_with_count(
    hamiltonian: &SpinHamiltonian,
    target: &PauliString,
) -> Result<(BTreeSet<PauliString>, usize)> {
    check_string(hamiltonian, target)?;
    let n_qubits = hamiltonian.n_qubits();
    let factors = target.factors();
    let mut found = BTreeSet::new();
    let mut examined = 0usize;

    // Same length: the field rotates site i from μ_i into ν_i.
    for &(i, nu_i) in factors {
        for mu_i in Axis::ALL.into_iter().filter(|&a| a != nu_i) {
            examined += 1;
            let lambda = levi_bar(mu_i, nu_i)?;
            if hamiltonian.h(i, lambda).abs() >= COEFFICIENT_TOLERANCE {
                found.insert(target.with(i, mu_i));
            }
        }
    }
    // One shorter: target = candidate with j attached and i rotated.
    for &(j, nu_j) in factors {
        for &(i, nu_i) in factors {
            if i == j {
                continue;
            }
            for mu_i in Axis::ALL.into_iter().filter(|&a| a != nu_i) {
                examined += 1;
                let mu = levi_bar(mu_i, nu_i)?;
                if 0.5 * hamiltonian.v(i, j, mu, nu_j).abs() >= COEFFICIENT_TOLERANCE {
                    found.insert(target.without(j).with(i, mu_i));
                }
            }
        }
    }
    // One longer: candidate carries an extra site i that gets absorbed while j rotates.
    for i in (1..=n_qubits).filter(|&i| target.axis_at(i).is_none()) {
        for &(j, nu_j) in factors {
            for mu_i in Axis::ALL {
                for mu_j in Axis::ALL.into_iter().filter(|&a| a != nu_j) {
                    examined += 1;
                    let nu = levi_bar(mu_j, nu_j)?;
                    if 0.5 * hamiltonian.v(i, j, mu_i, nu).abs() >= COEFFICIENT_TOLERANCE {
                        found.insert(target.with(i, mu_i).with(j, mu_j));
                    }
                }
            }
        }
    }
    Ok((found, examined))
}

/// A radius-`r` subset of the hierarchy around a list of seed strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySubset {
    pub seeds: Vec<PauliString>,
    pub r: usize,
    pub equations: Vec<BbgkyEquation>,
    /// Seeds first, then every other string of the subset in canonical order.
    pub correlators: Vec<PauliString>,
}

impl HierarchySubset {
    /// A subset with no equations over the given correlators; mitigation on it
    /// reduces to plain per-slice extrapolation.
    pub fn unconstrained(correlators: Vec<PauliString>) -> Self {
        Self { seeds: correlators.clone(), r: 0, equations: Vec::new(), correlators }
    }

    pub fn seed_count(&self) -> usize {
        self.seeds.len()
    }

    /// Number of equations `g`.
    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    /// Number of correlators `Λ`.
    pub fn correlator_count(&self) -> usize {
        self.correlators.len()
    }

    pub fn position(&self, string: &PauliString) -> Option<usize> {
        self.correlators.iter().position(|c| c == string)
    }

    /// Checks the structural invariants: seeds lead the correlator list and
    /// every string appearing in an equation is a correlator.
    pub fn validate(&self) -> Result<()> {
        if self.correlators.len() < self.seeds.len()
            || self.correlators[..self.seeds.len()] != self.seeds[..]
        {
            return Err(Error::invalid("correlator list must start with the seeds"));
        }
        let known: BTreeSet<&PauliString> = self.correlators.iter().collect();
        if known.len() != self.correlators.len() {
            return Err(Error::invalid("duplicate correlator in subset"));
        }
        for eq in &self.equations {
            if !known.contains(&eq.lhs) {
                return Err(Error::invalid(format!("equation lhs {} is not a correlator", eq.lhs)));
            }
            for s in eq.rhs_strings() {
                if !known.contains(s) {
                    return Err(Error::invalid(format!("rhs string {s} is not a correlator")));
                }
            }
        }
        Ok(())
    }
}

/// Collects every string within `r` connection hops of the seeds and the
/// equations of those strings.
pub fn select_subset(
    hamiltonian: &SpinHamiltonian,
    seeds: &[PauliString],
    r: usize,
) -> Result<HierarchySubset> {
    if seeds.is_empty() {
        return Err(Error::invalid("seed list is empty"));
    }
    let mut members: BTreeSet<PauliString> = BTreeSet::new();
    for seed in seeds {
        check_string(hamiltonian, seed)?;
        if !members.insert(seed.clone()) {
            return Err(Error::invalid(format!("seed {seed} listed twice")));
        }
    }
    let mut frontier: Vec<PauliString> = members.iter().cloned().collect();
    for _ in 0..r {
        let mut next = Vec::new();
        for s in &frontier {
            for t in downstream(hamiltonian, s)?.into_iter().chain(upstream(hamiltonian, s)?) {
                if members.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let seed_set: BTreeSet<&PauliString> = seeds.iter().collect();
    let ordered_members: Vec<&PauliString> = seeds
        .iter()
        .chain(members.iter().filter(|s| !seed_set.contains(s)))
        .collect();
    let equations = ordered_members
        .iter()
        .map(|s| derive_equation(hamiltonian, s))
        .collect::<Result<Vec<_>>>()?;

    let mut rest: BTreeSet<PauliString> = members.iter().filter(|s| !seed_set.contains(s)).cloned().collect();
    for eq in &equations {
        for t in eq.rhs_strings() {
            if !seed_set.contains(t) {
                rest.insert(t.clone());
            }
        }
    }
    let correlators = seeds.iter().cloned().chain(rest).collect();
    Ok(HierarchySubset { seeds: seeds.to_vec(), r, equations, correlators })
}

/// Sizes (ascending) of the connected components of the full hierarchy,
/// including the identity, with edges given by downstream connections.
pub fn decompose(hamiltonian: &SpinHamiltonian) -> Result<Vec<usize>> {
    decompose_with_cap(hamiltonian, DEFAULT_DECOMPOSE_CAP)
}

pub fn decompose_with_cap(hamiltonian: &SpinHamiltonian, max_qubits: usize) -> Result<Vec<usize>> {
    let n = hamiltonian.n_qubits();
    if n > max_qubits {
        return Err(Error::ResourceLimit(format!(
            "decomposition enumerates 4^{n} strings; cap is {max_qubits} qubits"
        )));
    }
    let total = 4usize.pow(n as u32);
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for index in 0..total {
        let s = PauliString::from_index(index, n);
        for t in downstream(hamiltonian, &s)? {
            let (a, b) = (find(&mut parent, index), find(&mut parent, t.to_index(n)));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for index in 0..total {
        *sizes.entry(find(&mut parent, index)).or_insert(0) += 1;
    }
    let mut sizes: Vec<usize> = sizes.into_values().collect();
    sizes.sort_unstable();
    Ok(sizes)
}
