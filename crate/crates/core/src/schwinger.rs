//! Lattice Schwinger model on a spin chain and the parameter-scan harness.
//!
//! Staggered fermions map to `N_Q` spins with Gauss's law integrated out and
//! a penalty `λ Q²` selecting the zero-charge sector. The constant energy
//! shift is dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::hierarchy::{select_subset, HierarchySubset};
use crate::mitigation::{
    assemble_with, observable_report, AssembleOptions, FactoredProblem, ObservableCombination, ObservableReport,
};
use crate::parallel::{self, mix_seed, Execution};
use crate::pauli::{Axis, PauliString};
use crate::simulator::{evolve_exact, evolve_noisy_with, BasisState, EvolutionPlan, MeasurementSet, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwingerParams {
    pub n_qubits: usize,
    pub mass_ratio: f64,
    pub volume: f64,
    pub l0: f64,
    pub lambda: f64,
}

impl Default for SchwingerParams {
    fn default() -> Self {
        Self { n_qubits: 4, mass_ratio: 0.0, volume: 30.0, l0: 0.0, lambda: 100.0 }
    }
}

impl SchwingerParams {
    /// `x = (N_Q / V)²`.
    pub fn x(&self) -> f64 {
        (self.n_qubits as f64 / self.volume).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || !self.n_qubits.is_multiple_of(2) {
            return Err(Error::invalid(format!("n_qubits = {} must be even and at least 2", self.n_qubits)));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(Error::invalid("volume must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        if !self.mass_ratio.is_finite() || !self.l0.is_finite() {
            return Err(Error::invalid("mass_ratio and l0 must be finite"));
        }
        Ok(())
    }
}

fn alternating_sign(site: usize) -> f64 {
    if site.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Spin-chain couplings of the model (sites `1..=N_Q`).
pub fn build_hamiltonian(params: &SchwingerParams) -> Result<SpinHamiltonian> {
    params.validate()?;
    let n = params.n_qubits;
    let nf = n as f64;
    let x = params.x();
    let mut h = SpinHamiltonian::zero(n);
    for i in 1..=n {
        let mut z = -params.mass_ratio * x.sqrt() * alternating_sign(i);
        if i < n {
            z += nf / 4.0 - 0.5 * ((i - 1) as f64 / 2.0).ceil() + params.l0 * (nf - i as f64);
        }
        h.set_h(i, Axis::Z, 2.0 * z)?;
    }
    for i in 1..n {
        h.set_v(i, i + 1, Axis::X, Axis::X, 2.0 * x)?;
        h.set_v(i, i + 1, Axis::Y, Axis::Y, 2.0 * x)?;
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            h.set_v(i, j, Axis::Z, Axis::Z, 2.0 * (nf - j as f64 + params.lambda))?;
        }
    }
    Ok(h)
}

/// The `σ^3` string on every site, `Z1, …, ZN`.
pub fn charge_seeds(n_qubits: usize) -> Vec<PauliString> {
    (1..=n_qubits).map(|i| PauliString::single(i, Axis::Z)).collect()
}

/// Electric charge `Q = ½ Σ σ_i^3`.
pub fn observable_q(n_qubits: usize) -> ObservableCombination {
    ObservableCombination {
        name: "Q".into(),
        constant_offset: 0.0,
        weighted_strings: charge_seeds(n_qubits).into_iter().map(|s| (0.5, s)).collect(),
    }
}

/// Particle number `P = N_Q/2 − ½ Σ (−1)^i σ_i^3`.
pub fn observable_p(n_qubits: usize) -> ObservableCombination {
    ObservableCombination {
        name: "P".into(),
        constant_offset: n_qubits as f64 / 2.0,
        weighted_strings: charge_seeds(n_qubits)
            .into_iter()
            .enumerate()
            .map(|(k, s)| (-0.5 * alternating_sign(k + 1), s))
            .collect(),
    }
}

/// Alternating `|0101…⟩` starting state.
pub fn initial_state(n_qubits: usize) -> BasisState {
    BasisState::alternating(n_qubits)
}

/// Settings shared by every cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSettings {
    pub plan: EvolutionPlan,
    pub noise: NoiseModel,
    /// Hierarchy radius around the charge seeds.
    pub radius: usize,
    /// Polynomial degree of the error-level fits.
    pub degree: usize,
    pub g_weight: f64,
    pub max_qubits: usize,
}

/// Scores of one observable with and without the hierarchy constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableScores {
    pub zne: ObservableReport,
    pub bbgky: ObservableReport,
    pub reference: Vec<f64>,
}

/// Everything produced by one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRun {
    pub params: SchwingerParams,
    pub subset: HierarchySubset,
    pub measurements: MeasurementSet,
    pub scores: Vec<ObservableScores>,
}

/// Exact observable values at `t_s = s Δt`, `s = 0..=N`, `[observable][s]`.
pub fn reference_series(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    plan: &EvolutionPlan,
    observables: &[ObservableCombination],
) -> Result<Vec<Vec<f64>>> {
    let times: Vec<f64> = (0..=plan.n_steps).map(|s| s as f64 * plan.dt()).collect();
    evolve_exact(hamiltonian, initial, &times, observables)
}

/// Mitigates `measurements` both per slice (no equations) and with the
/// equations of `subset`, scoring each observable against `reference`.
pub fn score_observables(
    measurements: &MeasurementSet,
    subset: &HierarchySubset,
    observables: &[ObservableCombination],
    reference: &[Vec<f64>],
    degree: usize,
    g_weight: f64,
) -> Result<Vec<ObservableScores>> {
    let mut baseline_strings: Vec<PauliString> = Vec::new();
    for obs in observables {
        for (_, s) in &obs.weighted_strings {
            if !baseline_strings.contains(s) {
                baseline_strings.push(s.clone());
            }
        }
    }
    baseline_strings.sort_by_key(|s| measurements.index_of(s));
    let baseline = HierarchySubset::unconstrained(baseline_strings);
    let options = AssembleOptions { degree, g_weight };
    let zne_problem = assemble_with(measurements, &baseline, &options)?;
    let bbgky_problem = assemble_with(measurements, subset, &options)?;
    let zne = FactoredProblem::new(&zne_problem)?;
    let bbgky = FactoredProblem::new(&bbgky_problem)?;
    let zne_result = zne.solve()?;
    let bbgky_result = bbgky.solve()?;
    observables
        .iter()
        .zip(reference)
        .map(|(obs, reference)| {
            Ok(ObservableScores {
                zne: observable_report(&zne, &zne_result, obs, reference)?,
                bbgky: observable_report(&bbgky, &bbgky_result, obs, reference)?,
                reference: reference.clone(),
            })
        })
        .collect()
}

/// Full pipeline at one parameter point: hierarchy selection, noisy
/// simulation, exact reference, and both mitigations for `Q` and `P`.
pub fn run_cell(params: &SchwingerParams, settings: &CellSettings, execution: Execution) -> Result<CellRun> {
    let n = params.n_qubits;
    let hamiltonian = build_hamiltonian(params)?;
    let subset = select_subset(&hamiltonian, &charge_seeds(n), settings.radius)?;
    let initial = initial_state(n);
    let measurements = evolve_noisy_with(
        &hamiltonian,
        &initial,
        &settings.plan,
        &settings.noise,
        &subset.correlators,
        execution,
        settings.max_qubits,
    )?;
    let observables = [observable_q(n), observable_p(n)];
    let reference = reference_series(&hamiltonian, &initial, &settings.plan, &observables)?;
    let scores = score_observables(
        &measurements,
        &subset,
        &observables,
        &reference,
        settings.degree,
        settings.g_weight,
    )?;
    Ok(CellRun { params: *params, subset, measurements, scores })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub base: SchwingerParams,
    pub l0_values: Vec<f64>,
    pub mass_values: Vec<f64>,
}

impl ScanSpec {
    /// `n × n` evenly spaced grid over `[0, extent]²`.
    pub fn square(base: SchwingerParams, n: usize, extent: f64) -> Self {
        let axis: Vec<f64> = match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|k| extent * k as f64 / (n - 1) as f64).collect(),
        };
        Self { base, l0_values: axis.clone(), mass_values: axis }
    }
}

/// Error norms of one observable at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "dL0")]
    pub dl0: f64,
    #[serde(rename = "Lb")]
    pub lb: f64,
    #[serde(rename = "dLb")]
    pub dlb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub l0: f64,
    pub mass_ratio: f64,
    /// Keyed by observable name, in observable order.
    pub scores: Vec<(String, CellScore)>,
}

/// Table-style aggregate over all cells for one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub observable: String,
    pub mean_l0: f64,
    /// `sqrt(Σ ΔL²) / n`
    pub err_l0: f64,
    pub mean_lb: f64,
    pub err_lb: f64,
    /// `mean(L^∅) − mean(L^0)`
    pub difference: f64,
    /// `1 − mean(L^∅) / mean(L^0)`
    pub relative_improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub l0_values: Vec<f64>,
    pub mass_values: Vec<f64>,
    /// Row-major over `(l0, mass)`.
    pub cells: Vec<CellResult>,
}

pub const SCAN_CSV_HEADER: &str = "l0,m_over_g,observable,L0,dL0,Lb,dLb";

impl ScanGrid {
    pub fn cell(&self, l0_index: usize, mass_index: usize) -> &CellResult {
        &self.cells[l0_index * self.mass_values.len() + mass_index]
    }

    pub fn observables(&self) -> Vec<String> {
        self.cells
            .first()
            .map(|c| c.scores.iter().map(|(name, _)| name.clone()).collect())
            .unwrap_or_default()
    }

    pub fn summary(&self) -> Vec<ScanSummary> {
        self.observables()
            .into_iter()
            .enumerate()
            .map(|(k, observable)| {
                let n = self.cells.len() as f64;
                let scores: Vec<CellScore> = self.cells.iter().map(|c| c.scores[k].1).collect();
                let mean = |f: fn(&CellScore) -> f64| scores.iter().map(f).sum::<f64>() / n;
                let err = |f: fn(&CellScore) -> f64| scores.iter().map(|s| f(s).powi(2)).sum::<f64>().sqrt() / n;
                let mean_l0 = mean(|s| s.l0);
                let mean_lb = mean(|s| s.lb);
                ScanSummary {
                    observable,
                    mean_l0,
                    err_l0: err(|s| s.dl0),
                    mean_lb,
                    err_lb: err(|s| s.dlb),
                    difference: mean_lb - mean_l0,
                    relative_improvement: 1.0 - mean_lb / mean_l0,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SCAN_CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            for (name, s) in &cell.scores {
                out.push_str(&format!(
                    "{:?},{:?},{},{:?},{:?},{:?},{:?}\n",
                    cell.l0, cell.mass_ratio, name, s.l0, s.dl0, s.lb, s.dlb
                ));
            }
        }
        out
    }

    /// Heat-map table `[l0][mass]` of `f` for one observable.
    pub fn table(&self, observable: usize, f: impl Fn(&CellScore) -> f64) -> Vec<Vec<f64>> {
        self.l0_values
            .iter()
            .enumerate()
            .map(|(a, _)| {
                (0..self.mass_values.len())
                    .map(|b| f(&self.cell(a, b).scores[observable].1))
                    .collect()
            })
            .collect()
    }
}

/// Runs every grid cell with its own derived RNG seed. Cells run in
/// parallel under [`Execution::Parallel`]; the levels inside a cell then run
/// sequentially.
pub fn run_scan(spec: &ScanSpec, settings: &CellSettings, execution: Execution) -> Result<ScanGrid> {
    if spec.l0_values.is_empty() || spec.mass_values.is_empty() {
        return Err(Error::invalid("scan grid is empty"));
    }
    let points: Vec<(f64, f64)> = spec
        .l0_values
        .iter()
        .flat_map(|&l0| spec.mass_values.iter().map(move |&m| (l0, m)))
        .collect();
    let cells = parallel::try_map(execution, &points, |index, &(l0, mass_ratio)| {
        let params = SchwingerParams { l0, mass_ratio, ..spec.base };
        let mut cell_settings = settings.clone();
        cell_settings.plan.rng_seed = mix_seed(settings.plan.rng_seed, index as u64, 1);
        let run = run_cell(&params, &cell_settings, Execution::Sequential)?;
        let scores = run
            .scores
            .iter()
            .map(|s| {
                (
                    s.zne.name.clone(),
                    CellScore { l0: s.zne.l, dl0: s.zne.dl, lb: s.bbgky.l, dlb: s.bbgky.dl },
                )
            })
            .collect();
        Ok(CellResult { l0, mass_ratio, scores })
    })?;
    Ok(ScanGrid { l0_values: spec.l0_values.clone(), mass_values: spec.mass_values.clone(), cells })
}
