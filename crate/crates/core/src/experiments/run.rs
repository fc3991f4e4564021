//! The three experiment families.
//!
//! Every (grid point, trial) cell draws its own instance from
//! `derive_seed(master_seed, family, grid_index, trial)` and runs every
//! requested algorithm on it, so rows can be replayed one at a time and adding
//! trials never changes earlier ones. In `iterations_vs_ratio` the signal is
//! shared by all trials of a grid point and comes from trial slot 0 of the
//! signal stream.

use std::time::Instant;

use rayon::prelude::*;

use super::generate::{gen_gaussian_matrix, gen_gaussian_vector, gen_sparse_signal, normalize_columns};
use super::report::{ExperimentReport, ReportRow};
use super::rng::{derive_seed, Stream};
use super::spec::{Algorithm, ExperimentSpec, Family};
use crate::algorithms::{run, AlgorithmConfig, IterateTrace};
use crate::error::Result;
use crate::model::{Matrix, ProblemInstance, SparseSignal, Vector};
use crate::subsolvers::solve_l1_baseline;
use crate::thresholding::hard_threshold;

/// A generated trial: the instance and the vector recovery is judged against.
#[derive(Debug, Clone)]
pub struct Trial {
    pub problem: ProblemInstance,
    /// `x*`, or `x~_S` when the signal itself is perturbed.
    pub reference: SparseSignal,
    pub seed: u64,
}

/// Draw the instance of cell `(grid_index, trial)`.
pub fn make_trial(spec: &ExperimentSpec, grid_index: usize, trial: usize) -> Result<Trial> {
    let (m, k) = spec.grid()[grid_index];
    let (n, fam) = (spec.n, spec.family.id());
    let seed = derive_seed(spec.master_seed, fam, grid_index as u64, trial as u64);
    let mut a: Matrix = gen_gaussian_matrix(m, n, seed);
    if spec.normalize_columns {
        normalize_columns(&mut a);
    }
    let signal_seed = match spec.family {
        Family::IterationsVsRatio => derive_seed(spec.master_seed, fam, grid_index as u64, 0),
        _ => seed,
    };
    let x_star = gen_sparse_signal(n, k, signal_seed);
    let mut reference = x_star.clone();
    let mut x: Vector = x_star.into_values();
    if spec.noise.signal_scale > 0.0 {
        x += gen_gaussian_vector(n, seed, Stream::SignalNoise) * spec.noise.signal_scale;
        reference = SparseSignal::new(hard_threshold(&x, k)?.vector, k)?;
    }
    let mut y = &a * &x;
    if spec.noise.measurement_scale > 0.0 {
        y += gen_gaussian_vector(m, seed, Stream::MeasurementNoise) * spec.noise.measurement_scale;
    }
    Ok(Trial {
        problem: ProblemInstance::new(a, y, k)?,
        reference,
        seed,
    })
}

/// Outcome of one algorithm on one trial.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub row: ReportRow,
    pub x: Vector,
    /// Absent for the basis-pursuit baseline.
    pub trace: Option<IterateTrace>,
    pub grid_index: usize,
}

fn algorithm_config(spec: &ExperimentSpec, alg: crate::algorithms::Variant) -> AlgorithmConfig {
    let mut cfg = AlgorithmConfig::new(alg);
    cfg.max_iterations = spec.max_iterations;
    cfg.residual_tolerance = spec.residual_tolerance;
    cfg.qp = spec.qp;
    cfg.record_timing = spec.timing;
    cfg.ground_truth_criterion = match spec.family {
        Family::Trajectory => None,
        _ => Some(spec.success_threshold),
    };
    cfg
}

/// Run `alg` on a prepared trial.
pub fn run_on_trial(
    spec: &ExperimentSpec,
    t: &Trial,
    grid_index: usize,
    trial: usize,
    alg: Algorithm,
) -> Result<TrialRun> {
    let p = &t.problem;
    let start = spec.timing.then(Instant::now);
    let (x, iterations, trace) = match alg {
        Algorithm::Iterative(v) => {
            let cfg = algorithm_config(spec, v);
            let (x, trace) = run(p, &cfg, None, Some(&t.reference))?;
            (x, trace.iterations(), Some(trace))
        }
        Algorithm::L1 => {
            let sol = solve_l1_baseline(p, &spec.l1)?;
            (sol.x, sol.iterations, None)
        }
    };
    let wall_ms = start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3);
    let rel_error = (&x - t.reference.values()).norm() / t.reference.values().norm();
    Ok(TrialRun {
        row: ReportRow {
            family: spec.family,
            algorithm: alg,
            m: p.rows(),
            n: p.cols(),
            k: p.k(),
            trial,
            seed: t.seed,
            iterations,
            final_residual: p.residual(&x).norm(),
            rel_error,
            success: rel_error <= spec.success_threshold,
            wall_ms,
        },
        x,
        trace,
        grid_index,
    })
}

/// Regenerate a single report row from its coordinates.
pub fn replay_row(
    spec: &ExperimentSpec,
    grid_index: usize,
    trial: usize,
    alg: Algorithm,
) -> Result<ReportRow> {
    let t = make_trial(spec, grid_index, trial)?;
    Ok(run_on_trial(spec, &t, grid_index, trial, alg)?.row)
}

/// Run every cell of `spec`, in parallel over cells.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRun>> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = (0..spec.grid().len())
        .flat_map(|g| (0..spec.trials).map(move |t| (g, t)))
        .collect();
    let per_cell: Vec<Result<Vec<TrialRun>>> = cells
        .par_iter()
        .map(|&(g, t)| {
            let trial = make_trial(spec, g, t)?;
            spec.algorithms
                .iter()
                .map(|&alg| run_on_trial(spec, &trial, g, t, alg))
                .collect()
        })
        .collect();
    let mut runs = Vec::with_capacity(cells.len() * spec.algorithms.len());
    for r in per_cell {
        runs.extend(r?);
    }
    runs.sort_by(|a, b| {
        (a.grid_index, a.row.trial, a.row.algorithm).cmp(&(b.grid_index, b.row.trial, b.row.algorithm))
    });
    Ok(runs)
}

fn run_family(spec: &ExperimentSpec, family: Family) -> Result<ExperimentReport> {
    let mut spec = spec.clone();
    spec.family = family;
    let runs = run_experiment(&spec)?;
    Ok(ExperimentReport::new(
        spec.success_threshold,
        runs.into_iter().map(|r| r.row).collect(),
    ))
}

/// Residual trajectories; one trace per (grid point, trial, algorithm).
pub fn run_trajectory(spec: &ExperimentSpec) -> Result<(ExperimentReport, Vec<TrialRun>)> {
    let mut spec = spec.clone();
    spec.family = Family::Trajectory;
    let runs = run_experiment(&spec)?;
    let report = ExperimentReport::new(spec.success_threshold, runs.iter().map(|r| r.row.clone()).collect());
    Ok((report, runs))
}

pub fn run_iterations_vs_ratio(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_family(spec, Family::IterationsVsRatio)
}

pub fn run_success_frequency(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_family(spec, Family::SuccessFrequency)
}
