//! Noisy Trotterized evolution with unitary folding, shot sampling and an
//! exact reference.
//!
//! Noise model: after every Trotter factor a depolarizing channel acts on the
//! factor's sites (rate by arity); readout bit flips scale a weight-`w`
//! string expectation by `(1 - 2 f)^w`. Folding at rate `η` inserts
//! `⌊η s⌋` fold pairs by the end of step `s`, each pair costing two noise-only
//! step applications, so the noise accumulated at step `s` is
//! `s + 2⌊η s⌋` step-equivalents.

mod density;
mod exact;
mod measurement;
mod trotter;

pub use density::{BasisState, DensityMatrix};
pub use exact::{evolve_exact, evolve_exact_with_cap, DEFAULT_EXACT_CAP};
pub use measurement::{rows_from_csv, rows_to_csv, MeasurementRow, MeasurementSet, CSV_HEADER};
pub use trotter::{trotter_factors, FactorTerm, TrotterFactor};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SpinHamiltonian;
use crate::parallel::{self, mix_seed, Execution};
use crate::pauli::PauliString;

/// Default largest register for density-matrix simulation.
pub const DEFAULT_DENSITY_CAP: usize = 8;

/// Guard so that e.g. `0.29 * 100` still floors to 29.
const FLOOR_GUARD: f64 = 1e-9;

/// Discretisation, folding and sampling settings of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionPlan {
    pub n_steps: usize,
    pub total_time: f64,
    pub trotter_order: u8,
    pub fold_levels: Vec<f64>,
    /// `None` is the infinite-shot limit: exact noisy expectations, no
    /// error-level shift.
    pub shots: Option<u64>,
    pub rng_seed: u64,
}

impl EvolutionPlan {
    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be positive"));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::invalid("total_time must be positive"));
        }
        if !matches!(self.trotter_order, 1 | 2) {
            return Err(Error::invalid("trotter_order must be 1 or 2"));
        }
        match self.fold_levels.first() {
            Some(0.0) => {}
            _ => return Err(Error::invalid("fold_levels must start at 0")),
        }
        if self.fold_levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("fold_levels must be strictly increasing"));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub readout_flip: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
            ("readout_flip", self.readout_flip),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }

    fn rate(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.depol_1q
        } else {
            self.depol_2q
        }
    }

    /// Multiplicative readout damping of a weight-`w` string.
    pub fn readout_factor(&self, weight: usize) -> f64 {
        (1.0 - 2.0 * self.readout_flip).powi(weight as i32)
    }
}

/// Cumulative fold pairs inserted by the end of step `s`.
pub fn fold_pairs(step: usize, eta: f64) -> usize {
    (eta * step as f64 + FLOOR_GUARD).floor() as usize
}

/// Noise multiplier `(s + 2⌊η s⌋) / s` of a folded circuit at step `s`.
pub fn error_level(step: usize, eta: f64) -> Result<f64> {
    if step == 0 {
        return Err(Error::invalid("error level undefined at step 0"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("fold rate {eta} must be non-negative")));
    }
    Ok((step + 2 * fold_pairs(step, eta)) as f64 / step as f64)
}

/// [`error_level`] plus a normal shift of variance `1/N_S`.
pub fn shifted_error_level<R: Rng + ?Sized>(step: usize, eta: f64, shots: u64, rng: &mut R) -> Result<f64> {
    let level = error_level(step, eta)?;
    if shots == 0 {
        return Err(Error::invalid("shots must be positive"));
    }
    let normal = Normal::new(0.0, 1.0 / (shots as f64).sqrt()).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(level + normal.sample(rng))
}

/// `N_S`-shot estimate `2k/N_S − 1`, `k ~ Binomial(N_S, (1+e)/2)`.
pub fn sample_estimate<R: Rng + ?Sized>(exact: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if !(exact.abs() <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("expectation {exact} outside [-1, 1]")));
    }
    if shots == 0 {
        return Err(Error::invalid("shots must be positive"));
    }
    let p = (0.5 * (1.0 + exact)).clamp(0.0, 1.0);
    let binomial = Binomial::new(shots, p).map_err(|e| Error::Numerical(e.to_string()))?;
    let k = binomial.sample(rng);
    Ok(2.0 * k as f64 / shots as f64 - 1.0)
}

/// Step-by-step propagation of one fold level.
pub struct NoisyPropagator {
    rho: DensityMatrix,
    factors: Vec<(Vec<usize>, usize, DMatrix<Complex64>)>,
    noise: NoiseModel,
    eta: f64,
    step: usize,
    step_equivalents: usize,
}

impl NoisyPropagator {
    pub fn new(
        hamiltonian: &SpinHamiltonian,
        initial: &BasisState,
        plan: &EvolutionPlan,
        noise: NoiseModel,
        eta: f64,
    ) -> Result<Self> {
        if initial.n_qubits() != hamiltonian.n_qubits() {
            return Err(Error::invalid("initial state and Hamiltonian sizes differ"));
        }
        let factors = trotter_factors(hamiltonian, plan.dt(), plan.trotter_order)?
            .into_iter()
            .map(|f| (f.sites(), f.arity(), f.unitary()))
            .collect();
        Ok(Self {
            rho: DensityMatrix::pure_basis(initial),
            factors,
            noise,
            eta,
            step: 0,
            step_equivalents: 0,
        })
    }

    fn noise_only_step(&mut self) {
        for (sites, arity, _) in &self.factors {
            self.rho.depolarize(sites, self.noise.rate(*arity));
        }
        self.step_equivalents += 1;
    }

    /// Applies one Trotter step followed by any fold pairs due at its end.
    pub fn advance(&mut self) -> &DensityMatrix {
        for (sites, arity, u) in &self.factors {
            self.rho.apply_unitary(sites, u);
            self.rho.depolarize(sites, self.noise.rate(*arity));
        }
        self.step += 1;
        self.step_equivalents += 1;
        let due = fold_pairs(self.step, self.eta) - fold_pairs(self.step - 1, self.eta);
        for _ in 0..2 * due {
            self.noise_only_step();
        }
        debug_assert_eq!(self.step_equivalents, self.step + 2 * fold_pairs(self.step, self.eta));
        &self.rho
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Noisy step applications so far, folds included.
    pub fn step_equivalents(&self) -> usize {
        self.step_equivalents
    }

    /// Readout-damped `⟨P⟩`, clamped to `[-1, 1]`.
    pub fn measured_expectation(&self, p: &PauliString) -> f64 {
        (self.rho.expectation(p) * self.noise.readout_factor(p.len())).clamp(-1.0, 1.0)
    }
}

struct LevelRun {
    /// `[q][s-1]`
    values: Vec<Vec<f64>>,
    /// `[s-1]`
    eps: Vec<f64>,
}

fn run_level(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    plan: &EvolutionPlan,
    noise: NoiseModel,
    correlators: &[PauliString],
    level: usize,
) -> Result<LevelRun> {
    let eta = plan.fold_levels[level];
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(plan.rng_seed, level as u64, 0));
    let mut propagator = NoisyPropagator::new(hamiltonian, initial, plan, noise, eta)?;
    let mut values = vec![Vec::with_capacity(plan.n_steps); correlators.len()];
    let mut eps = Vec::with_capacity(plan.n_steps);
    for step in 1..=plan.n_steps {
        propagator.advance();
        eps.push(match plan.shots {
            Some(shots) => shifted_error_level(step, eta, shots, &mut rng)?,
            None => error_level(step, eta)?,
        });
        for (q, p) in correlators.iter().enumerate() {
            let exact = propagator.measured_expectation(p);
            values[q].push(match plan.shots {
                Some(shots) => sample_estimate(exact, shots, &mut rng)?,
                None => exact,
            });
        }
    }
    Ok(LevelRun { values, eps })
}

/// Simulates every fold level of `plan` and records the estimates of each
/// correlator after every step.
pub fn evolve_noisy(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    plan: &EvolutionPlan,
    noise: &NoiseModel,
    correlators: &[PauliString],
) -> Result<MeasurementSet> {
    evolve_noisy_with(hamiltonian, initial, plan, noise, correlators, Execution::default(), DEFAULT_DENSITY_CAP)
}

/// [`evolve_noisy`] with explicit execution mode and register cap.
pub fn evolve_noisy_with(
    hamiltonian: &SpinHamiltonian,
    initial: &BasisState,
    plan: &EvolutionPlan,
    noise: &NoiseModel,
    correlators: &[PauliString],
    execution: Execution,
    max_qubits: usize,
) -> Result<MeasurementSet> {
    let n = hamiltonian.n_qubits();
    if n > max_qubits {
        return Err(Error::ResourceLimit(format!(
            "density matrix on {n} qubits exceeds the cap of {max_qubits}"
        )));
    }
    plan.validate()?;
    noise.validate()?;
    for p in correlators {
        p.check_sites(n)?;
    }
    let levels: Vec<usize> = (0..plan.fold_levels.len()).collect();
    let runs = parallel::try_map(execution, &levels, |_, &level| {
        run_level(hamiltonian, initial, plan, *noise, correlators, level)
    })?;

    let n_levels = runs.len();
    let eps = (0..plan.n_steps)
        .map(|s| runs.iter().map(|run| run.eps[s]).collect())
        .collect();
    let values = (0..correlators.len())
        .map(|q| {
            (0..plan.n_steps)
                .map(|s| (0..n_levels).map(|l| runs[l].values[q][s]).collect())
                .collect()
        })
        .collect();
    let initial_values = correlators.iter().map(|p| initial.expectation(p)).collect();
    Ok(MeasurementSet {
        correlators: correlators.to_vec(),
        shots: plan.shots,
        total_time: plan.total_time,
        fold_levels: plan.fold_levels.clone(),
        eps,
        values,
        initial: initial_values,
    })
}
