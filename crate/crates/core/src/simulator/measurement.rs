use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Shot estimates of every correlator at every step and fold level.
///
/// `eps[s-1][level]`, `values[q][s-1][level]`, `initial[q]` (exact `t = 0`
/// values). `shots` is `null` in the infinite-shot limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSet {
    pub correlators: Vec<PauliString>,
    pub shots: Option<u64>,
    pub total_time: f64,
    pub fold_levels: Vec<f64>,
    pub eps: Vec<Vec<f64>>,
    pub values: Vec<Vec<Vec<f64>>>,
    pub initial: Vec<f64>,
}

/// One line of the flat CSV export.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRow {
    pub correlator: PauliString,
    pub step: usize,
    pub level: usize,
    pub eps: f64,
    pub value: f64,
}

pub const CSV_HEADER: &str = "correlator,step,level,eps,value";

impl MeasurementSet {
    pub fn n_steps(&self) -> usize {
        self.eps.len()
    }

    pub fn n_levels(&self) -> usize {
        self.fold_levels.len()
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps() as f64
    }

    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        self.correlators.iter().position(|c| c == p)
    }

    /// Shape and range checks.
    pub fn validate(&self) -> Result<()> {
        let (n, m, lambda) = (self.n_steps(), self.n_levels(), self.correlators.len());
        if n == 0 || m == 0 {
            return Err(Error::invalid("measurement set has no steps or no levels"));
        }
        if self.eps.iter().any(|row| row.len() != m) {
            return Err(Error::invalid("eps rows must have one entry per fold level"));
        }
        if self.values.len() != lambda || self.initial.len() != lambda {
            return Err(Error::invalid("values/initial must have one entry per correlator"));
        }
        for per_q in &self.values {
            if per_q.len() != n || per_q.iter().any(|row| row.len() != m) {
                return Err(Error::invalid("values must be shaped [correlator][step][level]"));
            }
        }
        let all = self.values.iter().flatten().flatten().chain(&self.initial);
        if all.clone().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::invalid("estimates must be finite and within [-1, 1]"));
        }
        if self.eps.iter().flatten().any(|e| !e.is_finite()) {
            return Err(Error::invalid("non-finite error level"));
        }
        if !(self.total_time > 0.0) {
            return Err(Error::invalid("total_time must be positive"));
        }
        Ok(())
    }

    /// Per-target shot variance `(1 − e²)/N_S` in `[q][s-1][level]` order;
    /// zero in the infinite-shot limit.
    pub fn shot_variance(&self, q: usize, step: usize, level: usize) -> f64 {
        match self.shots {
            Some(shots) => {
                let e = self.values[q][step - 1][level];
                ((1.0 - e * e) / shots as f64).max(0.0)
            }
            None => 0.0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn rows(&self) -> Vec<MeasurementRow> {
        let mut rows = Vec::new();
        for (q, p) in self.correlators.iter().enumerate() {
            for step in 1..=self.n_steps() {
                for level in 0..self.n_levels() {
                    rows.push(MeasurementRow {
                        correlator: p.clone(),
                        step,
                        level,
                        eps: self.eps[step - 1][level],
                        value: self.values[q][step - 1][level],
                    });
                }
            }
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows())
    }
}

pub fn rows_to_csv(rows: &[MeasurementRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        // `{:?}` on f64 prints the shortest round-tripping representation.
        let _ = writeln!(out, "{},{},{},{:?},{:?}", r.correlator, r.step, r.level, r.eps, r.value);
    }
    out
}

pub fn rows_from_csv(text: &str) -> Result<Vec<MeasurementRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse(format!("expected CSV header `{CSV_HEADER}`")));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("bad CSV line `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
            Ok(MeasurementRow {
                correlator: fields[0].parse()?,
                step: int(fields[1])?,
                level: int(fields[2])?,
                eps: num(fields[3])?,
                value: num(fields[4])?,
            })
        })
        .collect()
}
