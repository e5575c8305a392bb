use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// `offset + Σ_k weight_k σ_k`, a Hermitian observable expanded in Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableCombination {
    pub name: String,
    pub constant_offset: f64,
    pub weighted_strings: Vec<(f64, PauliString)>,
}

impl ObservableCombination {
    pub fn new(
        name: impl Into<String>,
        constant_offset: f64,
        weighted_strings: Vec<(f64, PauliString)>,
    ) -> Result<Self> {
        for (k, (_, s)) in weighted_strings.iter().enumerate() {
            if weighted_strings[..k].iter().any(|(_, t)| t == s) {
                return Err(Error::invalid(format!("string {s} repeated in observable")));
            }
        }
        Ok(Self { name: name.into(), constant_offset, weighted_strings })
    }

    /// Value given per-string expectations looked up by `lookup`.
    pub fn evaluate(&self, mut lookup: impl FnMut(&PauliString) -> Option<f64>) -> Result<f64> {
        let mut acc = self.constant_offset;
        for (w, s) in &self.weighted_strings {
            let value = lookup(s).ok_or_else(|| Error::invalid(format!("no value for string {s}")))?;
            acc += w * value;
        }
        Ok(acc)
    }
}
