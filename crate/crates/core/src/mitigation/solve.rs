use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MinNormSolver;
use crate::simulator::MeasurementSet;

use super::observable::ObservableCombination;
use super::problem::MitigationProblem;

/// Solution of a [`MitigationProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationResult {
    pub coefficients: Vec<f64>,
    /// `⟨Q_q^∅⟩_s` as `[q][s-1]`.
    pub extrapolations: Vec<Vec<f64>>,
    /// Propagated shot-noise standard deviation, `[q][s-1]`.
    pub std: Vec<Vec<f64>>,
}

/// A problem together with the factorization of its matrix.
pub struct FactoredProblem<'a> {
    problem: &'a MitigationProblem,
    solver: MinNormSolver,
}

impl<'a> FactoredProblem<'a> {
    pub fn new(problem: &'a MitigationProblem) -> Result<Self> {
        let solver = MinNormSolver::new(&problem.matrix)?;
        Ok(Self { problem, solver })
    }

    pub fn problem(&self) -> &MitigationProblem {
        self.problem
    }

    pub fn rank(&self) -> usize {
        self.solver.rank()
    }

    /// Minimum-norm coefficients and extrapolations, with standard deviations
    /// propagated from the problem's own row variances.
    pub fn solve(&self) -> Result<MitigationResult> {
        let coefficients = self.solver.solve(self.problem.target.as_slice())?;
        let layout = &self.problem.layout;
        let extrapolations = (0..layout.lambda())
            .map(|q| {
                (1..=layout.n_steps)
                    .map(|s| coefficients[layout.extraction_index(q, s)])
                    .collect()
            })
            .collect();
        let std = self.propagate_std(&self.problem.row_variance)?;
        Ok(MitigationResult { coefficients, extrapolations, std })
    }

    fn check_variances(&self, variances: &[f64]) -> Result<()> {
        if variances.len() != self.problem.layout.rows() {
            return Err(Error::invalid("one variance per target row is required"));
        }
        if variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("variances must be finite and non-negative"));
        }
        Ok(())
    }

    /// Standard deviation of `Σ_j f_j a_j` for independent target noise.
    pub fn functional_std(&self, functional: &[f64], variances: &[f64]) -> Result<f64> {
        self.check_variances(variances)?;
        let g = self.solver.pinv_transpose_apply(functional);
        Ok(g.iter().zip(variances).map(|(gi, v)| gi * gi * v).sum::<f64>().sqrt())
    }

    /// Standard deviation of every extrapolation, `[q][s-1]`.
    pub fn propagate_std(&self, variances: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_variances(variances)?;
        let layout = &self.problem.layout;
        let mut out = vec![vec![0.0; layout.n_steps]; layout.lambda()];
        if variances.iter().all(|&v| v == 0.0) {
            return Ok(out);
        }
        for (q, row) in out.iter_mut().enumerate() {
            for (k, value) in row.iter_mut().enumerate() {
                let p = self.solver.pinv_row(layout.extraction_index(q, k + 1));
                *value = p.iter().zip(variances).map(|(pi, v)| pi * pi * v).sum::<f64>().sqrt();
            }
        }
        Ok(out)
    }

    /// Coefficient functional selecting `Σ_k w_k ⟨Q_k^∅⟩_s` for an observable.
    pub fn observable_functional(&self, observable: &ObservableCombination, step: usize) -> Result<Vec<f64>> {
        let layout = &self.problem.layout;
        let mut f = vec![0.0; layout.cols()];
        for (w, s) in &observable.weighted_strings {
            let q = layout
                .correlators
                .iter()
                .position(|c| c == s)
                .ok_or_else(|| Error::invalid(format!("observable string {s} is not a mitigated correlator")))?;
            f[layout.extraction_index(q, step)] += w;
        }
        Ok(f)
    }
}

/// Solves `problem` in the minimum-norm least-squares sense.
pub fn solve(problem: &MitigationProblem) -> Result<MitigationResult> {
    FactoredProblem::new(problem)?.solve()
}

/// Extrapolation standard deviations for arbitrary per-row variances.
pub fn propagate_std(problem: &MitigationProblem, variances: &[f64]) -> Result<Vec<Vec<f64>>> {
    FactoredProblem::new(problem)?.propagate_std(variances)
}

/// Conventional ZNE: an independent degree-`d` least-squares fit in the error
/// level per `(q, s)` slice, returning the constant terms `[q][s-1]`.
pub fn zne_baseline(measurements: &MeasurementSet, degree: usize) -> Result<Vec<Vec<f64>>> {
    measurements.validate()?;
    let m = measurements.n_levels();
    let mut vandermonde = Vec::with_capacity(measurements.n_steps());
    for (k, eps) in measurements.eps.iter().enumerate() {
        let mut distinct: Vec<f64> = Vec::new();
        for &e in eps {
            if distinct.iter().all(|d| (d - e).abs() > 1e-12) {
                distinct.push(e);
            }
        }
        if distinct.len() < degree + 1 {
            return Err(Error::IllPosedFit(format!(
                "step {} has {} distinct error levels, degree {degree} needs {}",
                k + 1,
                distinct.len(),
                degree + 1
            )));
        }
        let a = DMatrix::from_fn(m, degree + 1, |r, c| eps[r].powi((degree - c) as i32));
        vandermonde.push(MinNormSolver::new(&a)?);
    }
    measurements
        .values
        .iter()
        .map(|per_q| {
            per_q
                .iter()
                .zip(&vandermonde)
                .map(|(y, solver)| solver.solve(y).map(|a| a[degree]))
                .collect()
        })
        .collect()
}
