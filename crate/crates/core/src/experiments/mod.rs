//! Random instances, the experiment families and their reports.

mod generate;
mod report;
pub mod rng;
mod run;
mod spec;

pub use generate::{gen_gaussian_matrix, gen_gaussian_vector, gen_sparse_signal, normalize_columns};
pub use report::{gnuplot_script, ExperimentReport, ReportRow, SummaryRow, REPORT_COLUMNS};
pub use run::{
    make_trial, replay_row, run_experiment, run_iterations_vs_ratio, run_on_trial, run_success_frequency,
    run_trajectory, Trial, TrialRun,
};
pub use spec::{ratio_grid, Algorithm, ExperimentSpec, Family};
