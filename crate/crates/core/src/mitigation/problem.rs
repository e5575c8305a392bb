use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hierarchy::HierarchySubset;
use crate::pauli::PauliString;
use crate::simulator::MeasurementSet;

use super::bernstein::BernsteinBasis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    /// Polynomial degree `d` of the per-slice fits.
    pub degree: usize,
    /// Multiplier on every equation-constraint row and its target (1 = unweighted).
    pub g_weight: f64,
}

impl AssembleOptions {
    pub fn new(degree: usize) -> Self {
        Self { degree, g_weight: 1.0 }
    }
}

/// Index bookkeeping of an assembled problem.
///
/// Unknowns are grouped per `(q, s)` as `(a_{qsd}, …, a_{qs1}, ⟨Q_q^∅⟩_s)`,
/// blocks ordered by correlator, then step. Rows are the `m` fold levels of
/// every `(q, s)` slice followed by `N + 1` constraint rows per equation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemLayout {
    pub correlators: Vec<PauliString>,
    /// Lhs string of every equation, in row-block order.
    pub equations: Vec<PauliString>,
    pub n_steps: usize,
    pub n_levels: usize,
    pub degree: usize,
    pub dt: f64,
}

impl ProblemLayout {
    pub fn lambda(&self) -> usize {
        self.correlators.len()
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    pub fn rows(&self) -> usize {
        self.fit_rows() + self.equation_count() * (self.n_steps + 1)
    }

    pub fn fit_rows(&self) -> usize {
        self.n_levels * self.n_steps * self.lambda()
    }

    pub fn cols(&self) -> usize {
        (self.degree + 1) * self.n_steps * self.lambda()
    }

    /// Column of the coefficient of `ε^power` in slice `(q, s)`, `s ≥ 1`.
    pub fn column(&self, q: usize, step: usize, power: usize) -> usize {
        debug_assert!(step >= 1 && power <= self.degree);
        let width = self.degree + 1;
        q * width * self.n_steps + (step - 1) * width + (self.degree - power)
    }

    /// Zero-based position of `⟨Q_q^∅⟩_s` in the coefficient vector:
    /// `(d+1) + (s−1)(d+1) + q(d+1)N − 1`.
    pub fn extraction_index(&self, q: usize, step: usize) -> usize {
        let width = self.degree + 1;
        width + (step - 1) * width + q * width * self.n_steps - 1
    }

    pub fn fit_row(&self, q: usize, step: usize, level: usize) -> usize {
        (q * self.n_steps + (step - 1)) * self.n_levels + level
    }

    pub fn constraint_row(&self, equation: usize, step: usize) -> usize {
        self.fit_rows() + equation * (self.n_steps + 1) + step
    }
}

/// `min ‖M a − y‖` with the fit rows on top and the equation constraints below.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationProblem {
    pub matrix: DMatrix<f64>,
    pub target: DVector<f64>,
    pub layout: ProblemLayout,
    /// Shot variance of every target entry (zero on constraint rows).
    pub row_variance: Vec<f64>,
    /// Exact `t = 0` value of every correlator.
    pub initial: Vec<f64>,
}

/// Positions of `wanted` inside `available`, which must preserve their order.
fn subsequence_positions(wanted: &[PauliString], available: &[PauliString]) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(wanted.len());
    let mut last: Option<usize> = None;
    for p in wanted {
        let pos = available
            .iter()
            .position(|c| c == p)
            .ok_or_else(|| Error::invalid(format!("correlator {p} was not measured")))?;
        if last.is_some_and(|l| pos <= l) {
            return Err(Error::invalid(format!(
                "correlator {p} appears out of order in the measurement set"
            )));
        }
        last = Some(pos);
        positions.push(pos);
    }
    Ok(positions)
}

/// Builds the joint least-squares problem from measurements and a hierarchy subset.
pub fn assemble(measurements: &MeasurementSet, subset: &HierarchySubset, degree: usize) -> Result<MitigationProblem> {
    assemble_with(measurements, subset, &AssembleOptions::new(degree))
}

pub fn assemble_with(
    measurements: &MeasurementSet,
    subset: &HierarchySubset,
    options: &AssembleOptions,
) -> Result<MitigationProblem> {
    measurements.validate()?;
    subset.validate()?;
    if !(options.g_weight.is_finite() && options.g_weight >= 0.0) {
        return Err(Error::invalid("g_weight must be finite and non-negative"));
    }
    let measured = subsequence_positions(&subset.correlators, &measurements.correlators)?;
    let layout = ProblemLayout {
        correlators: subset.correlators.clone(),
        equations: subset.equations.iter().map(|e| e.lhs.clone()).collect(),
        n_steps: measurements.n_steps(),
        n_levels: measurements.n_levels(),
        degree: options.degree,
        dt: measurements.dt(),
    };
    let (rows, cols) = (layout.rows(), layout.cols());
    let mut matrix = DMatrix::<f64>::zeros(rows, cols);
    let mut target = DVector::<f64>::zeros(rows);
    let mut row_variance = vec![0.0; rows];
    let initial: Vec<f64> = measured.iter().map(|&k| measurements.initial[k]).collect();

    for (q, &mq) in measured.iter().enumerate() {
        for step in 1..=layout.n_steps {
            for level in 0..layout.n_levels {
                let row = layout.fit_row(q, step, level);
                let eps = measurements.eps[step - 1][level];
                for power in 0..=layout.degree {
                    matrix[(row, layout.column(q, step, power))] = eps.powi(power as i32);
                }
                target[row] = measurements.values[mq][step - 1][level];
                row_variance[row] = measurements.shot_variance(mq, step, level);
            }
        }
    }

    let basis = BernsteinBasis::new(layout.n_steps, measurements.total_time)?;
    let n = layout.n_steps;
    let w = options.g_weight;
    for (e, equation) in subset.equations.iter().enumerate() {
        let lhs = subset
            .position(&equation.lhs)
            .ok_or_else(|| Error::invalid(format!("equation lhs {} not in subset", equation.lhs)))?;
        let terms: Vec<(f64, usize)> = equation
            .terms
            .iter()
            .map(|t| {
                subset
                    .position(&t.string)
                    .map(|k| (t.coeff, k))
                    .ok_or_else(|| Error::invalid(format!("rhs string {} not in subset", t.string)))
            })
            .collect::<Result<_>>()?;
        for step in 0..=n {
            let row = layout.constraint_row(e, step);
            for s_prime in 1..=n {
                matrix[(row, layout.extraction_index(lhs, s_prime))] += w * basis.beta_at_sample(s_prime, step)?;
            }
            let mut rhs_known = 0.0;
            for &(coeff, k) in &terms {
                if step == 0 {
                    rhs_known += coeff * initial[k];
                } else {
                    matrix[(row, layout.extraction_index(k, step))] -= w * coeff;
                }
            }
            target[row] = w * (rhs_known - basis.beta_at_sample(0, step)? * initial[lhs]);
        }
    }

    Ok(MitigationProblem { matrix, target, layout, row_variance, initial })
}
