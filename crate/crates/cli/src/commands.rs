//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bbgky_core::hierarchy::{
    decompose_with_cap, derive_equation, select_subset, upstream, upstream_with_count, BbgkyEquation,
    HierarchySubset,
};
use bbgky_core::mitigation::{
    assemble_with, observable_report, AssembleOptions, BernsteinBasis, FactoredProblem, MitigationProblem,
    ObservableCombination, ObservableReport,
};
use bbgky_core::oracle::{
    brute_force_components, brute_force_upstream, commutator_expansion, commutator_norm, hamiltonian_matrix,
    string_matrix,
};
use bbgky_core::schwinger::{
    build_hamiltonian, initial_state, observable_p, observable_q, reference_series, run_scan, SchwingerParams,
};
use bbgky_core::simulator::{evolve_noisy_with, EvolutionPlan, MeasurementSet};
use bbgky_core::{Axis, Execution, PauliString, SpinHamiltonian};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{read_to_string, write_atomic, write_json};

fn format_equation(eq: &BbgkyEquation) -> String {
    let mut line = format!("d/dt <{}> =", eq.lhs);
    if eq.terms.is_empty() {
        line.push_str(" 0");
    }
    for (k, t) in eq.terms.iter().enumerate() {
        let sign = if t.coeff < 0.0 { "-" } else { "+" };
        match k {
            0 => {
                let _ = write!(line, " {}{:?} <{}>", sign.trim_start_matches('+'), t.coeff.abs(), t.string);
            }
            _ => {
                let _ = write!(line, " {sign} {:?} <{}>", t.coeff.abs(), t.string);
            }
        }
    }
    line
}

#[derive(Serialize)]
struct Components {
    n_qubits: usize,
    component_sizes: Vec<usize>,
}

pub fn hierarchy(config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let params = config.params();
    let h = build_hamiltonian(&params)?;
    let subset = select_subset(&h, &config.seeds()?, config.mitigation.radius)?;
    write_json(&out_dir.join("subset.json"), &subset)?;
    let mut listing = String::new();
    for eq in &subset.equations {
        listing.push_str(&format_equation(eq));
        listing.push('\n');
    }
    write_atomic(&out_dir.join("equations.txt"), &listing)?;
    println!(
        "radius {}: g = {} equations over Λ = {} correlators",
        subset.r,
        subset.equation_count(),
        subset.correlator_count()
    );
    if params.n_qubits <= config.decompose_cap() {
        let sizes = decompose_with_cap(&h, config.decompose_cap())?;
        println!("component sizes: {sizes:?}");
        write_json(&out_dir.join("components.json"), &Components { n_qubits: params.n_qubits, component_sizes: sizes })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ObservableSeries<'a> {
    name: &'a str,
    values: &'a [f64],
}

#[derive(Serialize)]
struct Reference<'a> {
    times: Vec<f64>,
    observables: Vec<ObservableSeries<'a>>,
}

fn sample_times(plan_steps: usize, total_time: f64) -> Vec<f64> {
    (0..=plan_steps).map(|s| s as f64 * total_time / plan_steps as f64).collect()
}

fn observables(n_qubits: usize) -> [ObservableCombination; 2] {
    [observable_q(n_qubits), observable_p(n_qubits)]
}

pub fn simulate(config: &ExperimentConfig, infinite: bool, out_dir: &Path, execution: Execution) -> Result<()> {
    let params = config.params();
    let h = build_hamiltonian(&params)?;
    let subset = select_subset(&h, &config.seeds()?, config.mitigation.radius)?;
    let plan = config.plan(infinite)?;
    let initial = initial_state(params.n_qubits);
    let ms = evolve_noisy_with(
        &h,
        &initial,
        &plan,
        &config.noise(),
        &subset.correlators,
        execution,
        config.max_qubits(),
    )?;
    write_atomic(&out_dir.join("measurements.json"), &(ms.to_json()? + "\n"))?;
    write_atomic(&out_dir.join("measurements.csv"), &ms.to_csv())?;
    write_json(&out_dir.join("subset.json"), &subset)?;
    let obs = observables(params.n_qubits);
    let reference = reference_series(&h, &initial, &plan, &obs)?;
    write_json(
        &out_dir.join("reference.json"),
        &Reference {
            times: sample_times(plan.n_steps, plan.total_time),
            observables: obs.iter().zip(&reference).map(|(o, v)| ObservableSeries { name: &o.name, values: v }).collect(),
        },
    )?;
    println!(
        "simulated {} correlators × {} steps × {} fold levels ({})",
        ms.correlators.len(),
        ms.n_steps(),
        ms.n_levels(),
        match ms.shots {
            Some(n) => format!("{n} shots"),
            None => "infinite shots".into(),
        }
    );
    Ok(())
}

#[derive(Serialize)]
struct MethodOutput {
    correlators: Vec<PauliString>,
    /// `[q][s-1]`
    extrapolations: Vec<Vec<f64>>,
    std: Vec<Vec<f64>>,
    observables: Vec<ObservableReport>,
}

#[derive(Serialize)]
struct MitigationOutput {
    degree: usize,
    g_weight: f64,
    equations: usize,
    zne: MethodOutput,
    bbgky: MethodOutput,
}

fn mitigate_with(
    problem: &MitigationProblem,
    observables: &[ObservableCombination],
    reference: &[Vec<f64>],
) -> Result<MethodOutput> {
    let factored = FactoredProblem::new(problem)?;
    let result = factored.solve()?;
    let reports = observables
        .iter()
        .zip(reference)
        .map(|(obs, r)| observable_report(&factored, &result, obs, r))
        .collect::<bbgky_core::Result<_>>()?;
    Ok(MethodOutput {
        correlators: problem.layout.correlators.clone(),
        extrapolations: result.extrapolations,
        std: result.std,
        observables: reports,
    })
}

fn matrix_csv(problem: &MitigationProblem) -> String {
    let mut out = String::new();
    for r in 0..problem.matrix.nrows() {
        for c in 0..problem.matrix.ncols() {
            let _ = write!(out, "{:?},", problem.matrix[(r, c)]);
        }
        let _ = writeln!(out, "{:?}", problem.target[r]);
    }
    out
}

pub struct MitigateArgs<'a> {
    pub measurements: &'a Path,
    pub subset: &'a Path,
    pub no_equations: bool,
    pub dump_matrix: bool,
}

pub fn mitigate(config: &ExperimentConfig, args: &MitigateArgs<'_>, out_dir: &Path) -> Result<()> {
    let ms = MeasurementSet::from_json(&read_to_string(args.measurements)?)?;
    let subset: HierarchySubset = serde_json::from_str(&read_to_string(args.subset)?)
        .map_err(|e| CliError::Core(bbgky_core::Error::Parse(format!("{}: {e}", args.subset.display()))))?;
    subset.validate()?;
    let params = config.params();
    for s in &ms.correlators {
        s.check_sites(params.n_qubits)?;
    }
    let h = build_hamiltonian(&params)?;
    let plan = EvolutionPlan {
        n_steps: ms.n_steps(),
        total_time: ms.total_time,
        trotter_order: config.plan.trotter_order,
        fold_levels: ms.fold_levels.clone(),
        shots: ms.shots,
        rng_seed: config.seed,
    };
    let obs = observables(params.n_qubits);
    let reference = reference_series(&h, &initial_state(params.n_qubits), &plan, &obs)?;
    let options = AssembleOptions { degree: config.mitigation.degree, g_weight: config.mitigation.g_weight };

    let baseline = HierarchySubset::unconstrained(ms.correlators.clone());
    let zne_problem = assemble_with(&ms, &baseline, &options)?;
    let constrained = if args.no_equations { HierarchySubset::unconstrained(subset.correlators.clone()) } else { subset };
    let bbgky_problem = assemble_with(&ms, &constrained, &options)?;

    let output = MitigationOutput {
        degree: options.degree,
        g_weight: options.g_weight,
        equations: constrained.equation_count(),
        zne: mitigate_with(&zne_problem, &obs, &reference)?,
        bbgky: mitigate_with(&bbgky_problem, &obs, &reference)?,
    };
    write_json(&out_dir.join("mitigation.json"), &output)?;
    let mut csv = String::from("method,correlator,step,value,std\n");
    for (method, block) in [("zne", &output.zne), ("bbgky", &output.bbgky)] {
        for (q, s) in block.correlators.iter().enumerate() {
            for (k, value) in block.extrapolations[q].iter().enumerate() {
                let _ = writeln!(csv, "{method},{s},{},{value:?},{:?}", k + 1, block.std[q][k]);
            }
        }
    }
    write_atomic(&out_dir.join("mitigation.csv"), &csv)?;
    if args.dump_matrix {
        write_atomic(&out_dir.join("matrix.csv"), &matrix_csv(&bbgky_problem))?;
    }
    for (z, b) in output.zne.observables.iter().zip(&output.bbgky.observables) {
        println!("{}: ZNE L = {:.5} ± {:.5}, BBGKY L = {:.5} ± {:.5}", z.name, z.l, z.dl, b.l, b.dl);
    }
    Ok(())
}

#[derive(Serialize)]
struct HeatMaps {
    observable: String,
    #[serde(rename = "L0")]
    l0: Vec<Vec<f64>>,
    #[serde(rename = "Lb_minus_L0")]
    difference: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ScanOutput {
    l0_values: Vec<f64>,
    mass_values: Vec<f64>,
    summary: Vec<bbgky_core::schwinger::ScanSummary>,
    tables: Vec<HeatMaps>,
}

pub fn scan(
    config: &ExperimentConfig,
    grid: Option<usize>,
    infinite: bool,
    out_dir: &Path,
    execution: Execution,
) -> Result<()> {
    let spec = config.scan_spec(grid);
    let grid = run_scan(&spec, &config.cell_settings(infinite)?, execution)?;
    write_atomic(&out_dir.join("scan.csv"), &grid.to_csv())?;
    let summary = grid.summary();
    let tables = grid
        .observables()
        .into_iter()
        .enumerate()
        .map(|(k, observable)| HeatMaps {
            observable,
            l0: grid.table(k, |s| s.l0),
            difference: grid.table(k, |s| s.lb - s.l0),
        })
        .collect();
    for s in &summary {
        println!(
            "{}: mean L0 = {:.5} ± {:.5}, mean Lb = {:.5} ± {:.5}, improvement {:.1}%",
            s.observable,
            s.mean_l0,
            s.err_l0,
            s.mean_lb,
            s.err_lb,
            100.0 * s.relative_improvement
        );
    }
    write_json(
        &out_dir.join("scan_summary.json"),
        &ScanOutput { l0_values: grid.l0_values.clone(), mass_values: grid.mass_values.clone(), summary, tables },
    )
}

fn random_hamiltonian(rng: &mut ChaCha8Rng, n: usize) -> Result<SpinHamiltonian> {
    let mut h = SpinHamiltonian::zero(n);
    for i in 1..=n {
        for a in Axis::ALL {
            h.set_h(i, a, rng.random_range(-1.0..1.0))?;
            for j in (i + 1)..=n {
                for b in Axis::ALL {
                    h.set_v(i, j, a, b, rng.random_range(-1.0..1.0))?;
                }
            }
        }
    }
    Ok(h)
}

fn check(name: &str, ok: bool, detail: String, failures: &mut Vec<String>) {
    println!("{} {name} ({detail})", if ok { "PASS" } else { "FAIL" });
    if !ok {
        failures.push(name.to_string());
    }
}

/// Runs the oracle cross-checks and reports one line per check.
pub fn verify(seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();

    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 1 + k % 4;
        let h = random_hamiltonian(&mut rng, n)?;
        for _ in 0..10 {
            let s = PauliString::from_index(rng.random_range(1..4usize.pow(n as u32)), n);
            let eq = derive_equation(&h, &s)?;
            let dense = commutator_expansion(&h, &s, 1e-13);
            for (t, c) in &dense {
                worst = worst.max((eq.coefficient_of(t) - c).abs());
            }
            if eq.terms.iter().any(|t| !dense.contains_key(&t.string)) {
                worst = f64::INFINITY;
            }
        }
    }
    check("equations match dense commutators", worst < 1e-10, format!("max |Δ| = {worst:.1e}"), &mut failures);

    let mut mismatches = 0;
    let mut over = 0;
    for n in [2usize, 3] {
        let h = random_hamiltonian(&mut rng, n)?;
        let inverse = brute_force_upstream(&h)?;
        for s in PauliString::enumerate(n).skip(1) {
            let (found, examined) = upstream_with_count(&h, &s)?;
            mismatches += usize::from(found != inverse[&s] || upstream(&h, &s)? != found);
            over += usize::from(examined as f64 > 9.0 * (n * n) as f64 / 4.0);
        }
    }
    check(
        "upstream equals inverted downstream",
        mismatches == 0 && over == 0,
        format!("{mismatches} mismatches, {over} counter overruns"),
        &mut failures,
    );

    let params = SchwingerParams { mass_ratio: 0.5, l0: 0.5, ..Default::default() };
    let h = build_hamiltonian(&params)?;
    let sizes = decompose_with_cap(&h, 4)?;
    let brute = brute_force_components(&h, 1e-12);
    check(
        "Schwinger decomposition",
        sizes == brute && sizes == [1, 1, 126, 128],
        format!("{sizes:?}"),
        &mut failures,
    );

    let hm = hamiltonian_matrix(&h);
    // Twice the charge: the sum of every σ^3.
    let mut q = string_matrix(&PauliString::single(1, Axis::Z), 4);
    for i in 2..=4 {
        q += string_matrix(&PauliString::single(i, Axis::Z), 4);
    }
    let norm = commutator_norm(&q, &hm);
    check("charge commutes with the Hamiltonian", norm < 1e-10, format!("‖[Q, H]‖ = {norm:.1e}"), &mut failures);

    let basis = BernsteinBasis::new(20, 4.0)?;
    let samples: Vec<f64> = (0..=20).map(|s| 0.3 - 0.7 * s as f64 * basis.dt()).collect();
    let err = (0..=40)
        .map(|k| basis.derivative(&samples, 0.1 * k as f64).map(|d| (d + 0.7).abs()))
        .collect::<bbgky_core::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    check("Bernstein derivative exact on affine data", err < 1e-12, format!("max |Δ| = {err:.1e}"), &mut failures);

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failed checks: {}", failures.join(", "))))
    }
}

/// Output directory: the flag wins over the config.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.unwrap_or_else(|| config.output.dir.clone())
}
