#![allow(dead_code)]

use bbgky_core::hierarchy::{BbgkyEquation, HierarchySubset, Term};
use bbgky_core::simulator::MeasurementSet;
use bbgky_core::{Axis, PauliString, SpinHamiltonian};
use rand::Rng;

/// Dense random fields and couplings in `[-1, 1]`.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize) -> SpinHamiltonian {
    let mut h = SpinHamiltonian::zero(n);
    for i in 1..=n {
        for a in Axis::ALL {
            h.set_h(i, a, rng.random_range(-1.0..1.0)).unwrap();
        }
        for j in (i + 1)..=n {
            for a in Axis::ALL {
                for b in Axis::ALL {
                    h.set_v(i, j, a, b, rng.random_range(-1.0..1.0)).unwrap();
                }
            }
        }
    }
    h
}

/// A uniformly random non-identity string on `n` sites.
pub fn random_string<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    let total = 4usize.pow(n as u32);
    PauliString::from_index(rng.random_range(1..total), n)
}

/// Distinct strings, kept in first-drawn order.
pub fn distinct_strings<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = Vec::new();
    while out.len() < count {
        let s = random_string(rng, n);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Random measurements with distinct, increasing error levels per step.
pub fn random_measurements<R: Rng>(
    rng: &mut R,
    correlators: Vec<PauliString>,
    n_steps: usize,
    n_levels: usize,
    shots: Option<u64>,
) -> MeasurementSet {
    let fold_levels: Vec<f64> = (0..n_levels).map(|k| k as f64 * 0.5).collect();
    let eps = (0..n_steps)
        .map(|_| {
            let mut level = 1.0;
            (0..n_levels)
                .map(|_| {
                    let e = level;
                    level += rng.random_range(0.3..1.2);
                    e
                })
                .collect()
        })
        .collect();
    let values = correlators
        .iter()
        .map(|_| {
            (0..n_steps)
                .map(|_| (0..n_levels).map(|_| rng.random_range(-0.9..0.9)).collect())
                .collect()
        })
        .collect();
    let initial = correlators.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    MeasurementSet {
        correlators,
        shots,
        total_time: rng.random_range(0.5..4.0),
        fold_levels,
        eps,
        values,
        initial,
    }
}

/// A subset with hand-written equations.
pub fn custom_subset(correlators: Vec<PauliString>, equations: Vec<(usize, Vec<(f64, usize)>)>) -> HierarchySubset {
    let equations = equations
        .into_iter()
        .map(|(lhs, terms)| BbgkyEquation {
            lhs: correlators[lhs].clone(),
            terms: terms
                .into_iter()
                .map(|(coeff, k)| Term { coeff, string: correlators[k].clone() })
                .collect(),
        })
        .collect();
    HierarchySubset { seeds: correlators.clone(), r: 0, equations, correlators }
}
