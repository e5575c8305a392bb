//! Joint least-squares mitigation.
//!
//! Each `(correlator, step)` slice gets a degree-`d` polynomial in the error
//! level whose constant term is the mitigated value. Hierarchy equations are
//! imposed at every time point by replacing `d/dt` with the derivative of the
//! Bernstein polynomial through the mitigated series; the known `t = 0`
//! values move to the target vector. With no equations the problem decouples
//! into ordinary per-slice extrapolations.

mod bernstein;
mod norm;
mod observable;
mod problem;
mod solve;

pub use bernstein::{bernstein_b, bernstein_beta, BernsteinBasis};
pub use norm::{error_norm, observable_report, ErrorNorm, ObservableReport};
pub use observable::ObservableCombination;
pub use problem::{assemble, assemble_with, AssembleOptions, MitigationProblem, ProblemLayout};
pub use solve::{propagate_std, solve, zne_baseline, FactoredProblem, MitigationResult};
