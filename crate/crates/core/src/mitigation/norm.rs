use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::observable::ObservableCombination;
use super::solve::{FactoredProblem, MitigationResult};

/// Accumulated error `L = sqrt(Δt Σ_s (est_s − ref_s)²)` and its propagated
/// standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorm {
    pub l: f64,
    pub dl: f64,
}

/// `L` over `s = 0..=N` with `ΔL` propagated at leading order from
/// independent per-point standard deviations.
pub fn error_norm(estimates: &[f64], reference: &[f64], std: &[f64], dt: f64) -> Result<ErrorNorm> {
    if estimates.len() != reference.len() || estimates.len() != std.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} estimates, {} reference values, {} deviations",
            estimates.len(),
            reference.len(),
            std.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let residuals: Vec<f64> = estimates.iter().zip(reference).map(|(e, r)| e - r).collect();
    let l = (dt * residuals.iter().map(|r| r * r).sum::<f64>()).sqrt();
    let dl = if l > 0.0 {
        residuals
            .iter()
            .zip(std)
            .map(|(r, s)| (dt * r / l * s).powi(2))
            .sum::<f64>()
            .sqrt()
    } else {
        0.0
    };
    Ok(ErrorNorm { l, dl })
}

/// A mitigated observable time series and its accuracy against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub name: String,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "dL")]
    pub dl: f64,
    /// `s = 0..=N`; the `s = 0` entry is the exact initial value.
    pub series: Vec<f64>,
    pub std: Vec<f64>,
}

/// Combines mitigated string extrapolations into `observable` and scores the
/// series against `reference` (`s = 0..=N`). Standard deviations use the full
/// covariance induced by the shared least-squares solution.
pub fn observable_report(
    factored: &FactoredProblem<'_>,
    result: &MitigationResult,
    observable: &ObservableCombination,
    reference: &[f64],
) -> Result<ObservableReport> {
    let problem = factored.problem();
    let layout = &problem.layout;
    let n = layout.n_steps;
    if reference.len() != n + 1 {
        return Err(Error::invalid(format!("reference needs {} points, got {}", n + 1, reference.len())));
    }
    let lookup_index = |s: &crate::pauli::PauliString| layout.correlators.iter().position(|c| c == s);
    let mut series = Vec::with_capacity(n + 1);
    series.push(observable.evaluate(|s| lookup_index(s).map(|q| problem.initial[q]))?);
    for step in 1..=n {
        series.push(observable.evaluate(|s| lookup_index(s).map(|q| result.extrapolations[q][step - 1]))?);
    }
    let variances = &problem.row_variance;
    let mut std = vec![0.0];
    for step in 1..=n {
        std.push(factored.functional_std(&factored.observable_functional(observable, step)?, variances)?);
    }

    let dt = layout.dt;
    let residuals: Vec<f64> = series.iter().zip(reference).map(|(e, r)| e - r).collect();
    let l = (dt * residuals.iter().map(|r| r * r).sum::<f64>()).sqrt();
    let dl = if l > 0.0 {
        let mut functional = vec![0.0; layout.cols()];
        for step in 1..=n {
            let scale = dt * residuals[step] / l;
            for (j, v) in factored.observable_functional(observable, step)?.into_iter().enumerate() {
                functional[j] += scale * v;
            }
        }
        factored.functional_std(&functional, variances)?
    } else {
        0.0
    };
    Ok(ObservableReport { name: observable.name.clone(), l, dl, series, std })
}
