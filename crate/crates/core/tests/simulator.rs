mod common;

use bbgky_core::mitigation::ObservableCombination;
use bbgky_core::schwinger::{build_hamiltonian, charge_seeds, initial_state, SchwingerParams};
use bbgky_core::simulator::{
    evolve_exact, evolve_exact_with_cap, evolve_noisy, evolve_noisy_with, fold_pairs, rows_from_csv, rows_to_csv,
    BasisState, EvolutionPlan, MeasurementSet, NoiseModel, NoisyPropagator,
};
use bbgky_core::{Error, Execution, PauliString};
use common::{distinct_strings, random_hamiltonian};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn plan(n_steps: usize, total_time: f64, order: u8, fold_levels: Vec<f64>, shots: Option<u64>) -> EvolutionPlan {
    EvolutionPlan { n_steps, total_time, trotter_order: order, fold_levels, shots, rng_seed: 42 }
}

fn noise() -> NoiseModel {
    NoiseModel { depol_1q: 0.001, depol_2q: 0.01, readout_flip: 0.02 }
}

fn single(s: &PauliString) -> ObservableCombination {
    ObservableCombination::new(s.to_string(), 0.0, vec![(1.0, s.clone())]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_matrix_stays_physical(seed in any::<u64>(), eta in 0.0f64..2.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hamiltonian(&mut rng, 3);
        let strong = NoiseModel { depol_1q: 0.05, depol_2q: 0.2, readout_flip: 0.0 };
        let plan = plan(6, 1.5, 1, vec![0.0], None);
        let mut propagator = NoisyPropagator::new(&h, &BasisState::parse("011").unwrap(), &plan, strong, eta).unwrap();
        for _ in 0..plan.n_steps {
            let rho = propagator.advance();
            prop_assert!(rho.hermiticity_defect() < 1e-12);
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12 && rho.trace().im.abs() < 1e-12);
            prop_assert!(rho.min_eigenvalue() > -1e-10);
            let s = propagator.step();
            prop_assert_eq!(propagator.step_equivalents(), s + 2 * fold_pairs(s, eta));
        }
    }

    #[test]
    fn estimates_stay_in_range(seed in any::<u64>(), shots in 1u64..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hamiltonian(&mut rng, 2);
        let correlators = distinct_strings(&mut rng, 2, 4);
        let plan = EvolutionPlan { rng_seed: seed, ..plan(3, 1.0, 2, vec![0.0, 1.0], Some(shots)) };
        let ms = evolve_noisy(&h, &BasisState::parse("10").unwrap(), &plan, &noise(), &correlators).unwrap();
        prop_assert!(ms.values.iter().flatten().flatten().all(|v| v.abs() <= 1.0));
        let again = evolve_noisy(&h, &BasisState::parse("10").unwrap(), &plan, &noise(), &correlators).unwrap();
        prop_assert_eq!(ms, again);
    }
}

#[test]
fn noiseless_trotter_converges_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = random_hamiltonian(&mut rng, 3);
    let state = BasisState::parse("010").unwrap();
    let observed: Vec<PauliString> = ["Z1", "X1 Y2", "Z2 X3"].iter().map(|s| s.parse().unwrap()).collect();
    let observables: Vec<_> = observed.iter().map(single).collect();
    let total_time = 1.0;
    let max_error = |n_steps: usize, order: u8| {
        let plan = plan(n_steps, total_time, order, vec![0.0], None);
        let ms = evolve_noisy(&h, &state, &plan, &NoiseModel::noiseless(), &observed).unwrap();
        let times: Vec<f64> = (1..=n_steps).map(|s| s as f64 * plan.dt()).collect();
        let exact = evolve_exact(&h, &state, &times, &observables).unwrap();
        let mut worst = 0.0f64;
        for q in 0..observed.len() {
            for s in 0..n_steps {
                worst = worst.max((ms.values[q][s][0] - exact[q][s]).abs());
            }
        }
        worst
    };
    // First order: global error O(Δt); second order: O(Δt²).
    let (a, b) = (max_error(20, 1), max_error(40, 1));
    assert!(a / b > 1.6 && a / b < 2.6, "first-order ratio {}", a / b);
    let (a, b) = (max_error(20, 2), max_error(40, 2));
    assert!(a / b > 3.2 && a / b < 5.2, "second-order ratio {}", a / b);
    assert!(b < 1e-3);
}

#[test]
fn schwinger_charge_is_conserved_by_trotter() {
    let h = build_hamiltonian(&SchwingerParams { mass_ratio: 0.7, l0: 0.4, ..Default::default() }).unwrap();
    let plan = plan(20, 4.0, 1, vec![0.0], None);
    let ms = evolve_noisy(&h, &initial_state(4), &plan, &NoiseModel::noiseless(), &charge_seeds(4)).unwrap();
    for s in 0..20 {
        let q: f64 = (0..4).map(|k| 0.5 * ms.values[k][s][0]).sum();
        assert!(q.abs() < 1e-12);
    }
}

#[test]
fn more_folding_means_more_damping() {
    // Averaged over many seeds, higher fold levels sit closer to zero.
    let h = build_hamiltonian(&SchwingerParams::default()).unwrap();
    let plan0 = plan(10, 2.0, 1, vec![0.0, 1.0, 2.0], Some(1000));
    let z1 = charge_seeds(4)[..1].to_vec();
    let mut sums = [0.0f64; 3];
    let seeds = 120;
    for seed in 0..seeds {
        let plan = EvolutionPlan { rng_seed: seed, ..plan0.clone() };
        let ms = evolve_noisy(&h, &initial_state(4), &plan, &noise(), &z1).unwrap();
        for (level, sum) in sums.iter_mut().enumerate() {
            *sum += ms.values[0][9][level];
        }
    }
    assert!(sums[0] > sums[1] && sums[1] > sums[2], "{sums:?}");
}

#[test]
fn execution_modes_agree() {
    let h = build_hamiltonian(&SchwingerParams::default()).unwrap();
    let plan = plan(5, 1.0, 1, vec![0.0, 1.0, 1.5, 2.0], Some(10240));
    let cs = charge_seeds(4);
    let a = evolve_noisy_with(&h, &initial_state(4), &plan, &noise(), &cs, Execution::Sequential, 8).unwrap();
    let b = evolve_noisy_with(&h, &initial_state(4), &plan, &noise(), &cs, Execution::Parallel, 8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_evolution_basics() {
    let h = build_hamiltonian(&SchwingerParams::default()).unwrap();
    let z: Vec<_> = charge_seeds(4).iter().map(single).collect();
    let values = evolve_exact(&h, &initial_state(4), &[0.0], &z).unwrap();
    let expected = [1.0, -1.0, 1.0, -1.0];
    for (k, e) in expected.iter().enumerate() {
        assert!((values[k][0] - e).abs() < 1e-12);
    }
    let big = bbgky_core::SpinHamiltonian::zero(11);
    let err = evolve_exact_with_cap(&big, &BasisState::alternating(11), &[0.0], &[], 10);
    assert!(matches!(err, Err(Error::ResourceLimit(_))));
}

#[test]
fn measurement_files_round_trip() {
    let h = build_hamiltonian(&SchwingerParams::default()).unwrap();
    let plan = plan(3, 0.6, 1, vec![0.0, 1.0], Some(100));
    let ms = evolve_noisy(&h, &initial_state(4), &plan, &noise(), &charge_seeds(4)).unwrap();
    let json = ms.to_json().unwrap();
    let back = MeasurementSet::from_json(&json).unwrap();
    assert_eq!(back, ms);
    assert_eq!(back.to_json().unwrap(), json);
    let csv = ms.to_csv();
    let rows = rows_from_csv(&csv).unwrap();
    assert_eq!(rows, ms.rows());
    assert_eq!(rows_to_csv(&rows), csv);
    assert!(MeasurementSet::from_json(&json.replacen("\"shots\"", "\"extra\": 1, \"shots\"", 1)).is_err());
}
