//! Pauli strings over sites `1..=N_Q`.
//!
//! A [`PauliString`] is a product of single-site Pauli operators, stored as a
//! site-sorted list of `(site, axis)` factors. The empty string is the
//! identity. Strings are ordered canonically by length first, then
//! lexicographically by their `(site, axis)` sequence.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Direction of a single-site Pauli operator: `X = σ^1`, `Y = σ^2`, `Z = σ^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Numeric index in `{1, 2, 3}`.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 1,
            Axis::Y => 2,
            Axis::Z => 3,
        }
    }

    /// Zero-based index, convenient for coefficient arrays.
    pub(crate) fn slot(self) -> usize {
        self.index() - 1
    }

    pub fn from_index(index: usize) -> Result<Axis> {
        match index {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(Error::invalid(format!("axis index {index} not in 1..=3"))),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A product of single-site Pauli operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a string from arbitrary-order factors. Sites must be distinct and
    /// positive.
    pub fn new(factors: impl IntoIterator<Item = (usize, Axis)>) -> Result<Self> {
        let mut factors: Vec<(usize, Axis)> = factors.into_iter().collect();
        factors.sort_by_key(|&(site, _)| site);
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!("site {} repeated in Pauli string", w[0].0)));
            }
        }
        if factors.first().is_some_and(|&(site, _)| site == 0) {
            return Err(Error::invalid("site indices start at 1"));
        }
        Ok(Self { factors })
    }

    /// Single-site operator `σ_site^axis`.
    pub fn single(site: usize, axis: Axis) -> Self {
        assert!(site >= 1, "site indices start at 1");
        Self { factors: vec![(site, axis)] }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn axis_at(&self, site: usize) -> Option<Axis> {
        self.factors
            .binary_search_by_key(&site, |&(s, _)| s)
            .ok()
            .map(|pos| self.factors[pos].1)
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|&(s, _)| s)
    }

    /// Copy with `site` set to `axis` (inserted if absent).
    pub fn with(&self, site: usize, axis: Axis) -> Self {
        let mut factors = self.factors.clone();
        match factors.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(pos) => factors[pos].1 = axis,
            Err(pos) => factors.insert(pos, (site, axis)),
        }
        Self { factors }
    }

    /// Copy with the factor on `site` removed.
    pub fn without(&self, site: usize) -> Self {
        let factors = self.factors.iter().copied().filter(|&(s, _)| s != site).collect();
        Self { factors }
    }

    /// Checks that every site lies in `1..=n_qubits`.
    pub fn check_sites(&self, n_qubits: usize) -> Result<()> {
        match self.max_site() {
            Some(site) if site > n_qubits => Err(Error::invalid(format!(
                "site {site} out of range 1..={n_qubits} in {self}"
            ))),
            _ => Ok(()),
        }
    }

    /// Encodes the string as a base-4 integer (digit 0 = identity) with site 1
    /// as the most significant digit.
    pub fn to_index(&self, n_qubits: usize) -> usize {
        let mut index = 0usize;
        for site in 1..=n_qubits {
            index = index * 4 + self.axis_at(site).map_or(0, Axis::index);
        }
        index
    }

    pub fn from_index(mut index: usize, n_qubits: usize) -> Self {
        let mut factors = Vec::new();
        for site in (1..=n_qubits).rev() {
            let digit = index % 4;
            index /= 4;
            if digit != 0 {
                factors.push((site, Axis::from_index(digit).expect("digit in 1..=3")));
            }
        }
        factors.reverse();
        Self { factors }
    }

    /// All `4^n_qubits` strings in index order, identity first.
    pub fn enumerate(n_qubits: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n_qubits as u32)).map(move |i| PauliString::from_index(i, n_qubits))
    }

    /// Bit masks describing the action on computational basis states of an
    /// `n_qubits` register: `(flip, z_mask, y_count)` such that
    /// `P|b⟩ = i^{y_count} (-1)^{popcount(b & z_mask)} |b ^ flip⟩`, where
    /// `z_mask` marks the Y and Z sites. Site 1 is the most significant bit.
    pub fn basis_action(&self, n_qubits: usize) -> (usize, usize, u32) {
        let mut flip = 0;
        let mut z_mask = 0;
        let mut y_count = 0;
        for &(site, axis) in &self.factors {
            let bit = 1usize << (n_qubits - site);
            match axis {
                Axis::X => flip |= bit,
                Axis::Y => {
                    flip |= bit;
                    z_mask |= bit;
                    y_count += 1;
                }
                Axis::Z => z_mask |= bit,
            }
        }
        (flip, z_mask, y_count)
    }

    /// Matrix element `⟨b ^ flip| P |b⟩` for the mask triple of
    /// [`basis_action`](Self::basis_action).
    pub(crate) fn basis_phase(b: usize, z_mask: usize, y_count: u32) -> Complex64 {
        let sign = if (b & z_mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        let i_pow = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        i_pow * sign
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        for (k, &(site, axis)) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", axis.letter(), site)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses tokens such as `"X1 Z3"`; `"I"` or an empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "I" {
            return Ok(Self::identity());
        }
        let mut factors = Vec::new();
        for token in trimmed.split_whitespace() {
            let mut chars = token.chars();
            let axis = match chars.next() {
                Some('X') | Some('x') => Axis::X,
                Some('Y') | Some('y') => Axis::Y,
                Some('Z') | Some('z') => Axis::Z,
                _ => return Err(Error::Parse(format!("bad Pauli factor `{token}`"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site in Pauli factor `{token}`")))?;
            factors.push((site, axis));
        }
        PauliString::new(factors).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
