//! The `optk` command line: experiment families, RIP estimation and a one-off solver.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use optk::analysis::{rip_constant_bruteforce, RIP_GUARD};
use optk::experiments::{
    gen_gaussian_matrix, gnuplot_script, ratio_grid, rng::derive_seed, run_iterations_vs_ratio,
    run_success_frequency, run_trajectory, Algorithm, ExperimentReport, ExperimentSpec, Family,
};
use optk::model::text::{read_matrix, read_vector, write_vector};
use optk::{run, AlgorithmConfig, Error, NoiseModel, ProblemInstance, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "optk", version, about = "Sparse recovery by optimal k-thresholding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residual trajectories on shared instances (default 100 x 200, k = 24).
    Traj(RunArgs),
    /// Iterations to recovery over a grid of m / n (default n = 200).
    Ratio(RunArgs),
    /// Success frequency over a sparsity grid (default 50 x 100).
    Phase(RunArgs),
    /// Brute-force restricted isometry constant of a random Gaussian matrix.
    Rip(RipArgs),
    /// Recover a signal from a matrix and measurement file.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Single sparsity level; shorthand for a one-point --k-grid.
    #[arg(long)]
    k: Option<usize>,
    /// Comma list or start:stop:step, e.g. 0.1:0.6:0.025.
    #[arg(long = "beta-grid")]
    beta_grid: Option<String>,
    /// Comma list or start:stop[:step], e.g. 5:20.
    #[arg(long = "k-grid")]
    k_grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma list from iht, htp, ot, otp, rot, rotp, rotp2, rotp3, l1.
    #[arg(long)]
    algs: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Measurement noise scale.
    #[arg(long)]
    noise: Option<f64>,
    /// Signal perturbation scale.
    #[arg(long = "signal-noise")]
    signal_noise: Option<f64>,
    /// Recovery threshold on the relative error.
    #[arg(long)]
    threshold: Option<f64>,
    /// Report CSV path; traces and summaries are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment spec; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Normalize the columns of every generated matrix.
    #[arg(long)]
    normalize: bool,
    /// Record wall-clock times (reports are then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct RipArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "K")]
    order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use unit-norm columns instead of the default 1/sqrt(m) scaling.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = RIP_GUARD)]
    guard: u128,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Whitespace-separated matrix, one row per line.
    #[arg(long)]
    matrix: PathBuf,
    /// Whitespace-separated measurement vector.
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "rotp")]
    algs: String,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Where to write the recovered vector (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the residual trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`cli_main`] with explicit output streams.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_INPUT
                }
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_guard_refusal() {
                EXIT_GUARD
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Traj(a) => {
            let spec = build_spec(Family::Trajectory, &a)?;
            let (report, runs) = run_trajectory(&spec)?;
            if let Some(path) = &a.out {
                let single = runs.len() == spec.algorithms.len();
                for r in &runs {
                    let Some(trace) = &r.trace else { continue };
                    let suffix = if single {
                        format!("trace_{}", r.row.algorithm)
                    } else {
                        format!("trace_{}_k{}_t{}", r.row.algorithm, r.row.k, r.row.trial)
                    };
                    trace.save_csv(&sibling(path, &suffix, "csv"))?;
                }
            }
            emit_report(&report, &spec, a.out.as_deref(), out, err, false)
        }
        Command::Ratio(a) => {
            let spec = build_spec(Family::IterationsVsRatio, &a)?;
            let report = run_iterations_vs_ratio(&spec)?;
            emit_report(&report, &spec, a.out.as_deref(), out, err, true)
        }
        Command::Phase(a) => {
            let spec = build_spec(Family::SuccessFrequency, &a)?;
            let report = run_success_frequency(&spec)?;
            emit_report(&report, &spec, a.out.as_deref(), out, err, true)
        }
        Command::Rip(a) => rip(&a, out),
        Command::Solve(a) => solve(&a, out),
    }
}

fn defaults(family: Family) -> ExperimentSpec {
    let algs = |s: &str| Algorithm::parse_list(s).expect("static list");
    match family {
        Family::Trajectory => {
            let mut s = ExperimentSpec::new(family, 100, 200, 1, algs("htp,rotp,rotp2,rotp3"));
            s.sparsity_grid = vec![24];
            s
        }
        Family::IterationsVsRatio => {
            let mut s = ExperimentSpec::new(family, 0, 200, 10, algs("rotp,rotp2,rotp3"));
            s.beta_grid = ratio_grid(0.3, 0.6, 0.05);
            s
        }
        Family::SuccessFrequency => {
            let mut s = ExperimentSpec::new(family, 50, 100, 20, algs("iht,htp,l1,rotp,rotp2,rotp3"));
            s.sparsity_grid = (5..=20).collect();
            s.noise = NoiseModel::new(0.01, 0.0).expect("valid");
            s
        }
    }
}

fn build_spec(family: Family, a: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &a.config {
        Some(path) => {
            let spec = ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?;
            if spec.family != family {
                return Err(Error::InvalidInput(format!(
                    "config describes a {} experiment, not {family}",
                    spec.family
                )));
            }
            spec
        }
        None => defaults(family),
    };
    if let Some(v) = a.m {
        spec.m = v;
    }
    if let Some(v) = a.n {
        spec.n = v;
    }
    if let Some(v) = a.k {
        spec.sparsity_grid = vec![v];
    }
    if let Some(g) = &a.k_grid {
        spec.sparsity_grid = parse_int_grid(g)?;
    }
    if let Some(g) = &a.beta_grid {
        spec.beta_grid = parse_real_grid(g)?;
    }
    if let Some(v) = a.trials {
        spec.trials = v;
    }
    if let Some(v) = &a.algs {
        spec.algorithms = Algorithm::parse_list(v)?;
    }
    if let Some(v) = a.max_iter {
        spec.max_iterations = v;
    }
    if let Some(v) = a.tol {
        spec.residual_tolerance = v;
    }
    if let Some(v) = a.seed {
        spec.master_seed = v;
    }
    if let Some(v) = a.noise {
        spec.noise.measurement_scale = v;
    }
    if let Some(v) = a.signal_noise {
        spec.noise.signal_scale = v;
    }
    if let Some(v) = a.threshold {
        spec.success_threshold = v;
    }
    spec.normalize_columns |= a.normalize;
    spec.timing |= a.timing;
    spec.validate()?;
    Ok(spec)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse '{s}' as a number")))
}

fn parse_real_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h): (f64, f64, f64) = (parse_num(start)?, parse_num(stop)?, parse_num(step)?);
            if !(h > 0.0) || b < a {
                return Err(Error::InvalidInput(format!("bad range '{s}'")));
            }
            Ok(ratio_grid(a, b, h))
        }
        [_] => s.split(',').map(parse_num).collect(),
        _ => Err(Error::InvalidInput(format!("bad grid '{s}'"))),
    }
}

fn parse_int_grid(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    let range = |a: usize, b: usize, h: usize| {
        if h == 0 || b < a {
            Err(Error::InvalidInput(format!("bad range '{s}'")))
        } else {
            Ok((a..=b).step_by(h).collect())
        }
    };
    match parts.as_slice() {
        [a, b] => range(parse_num(a)?, parse_num(b)?, 1),
        [a, b, h] => range(parse_num(a)?, parse_num(b)?, parse_num(h)?),
        [_] => s.split(',').map(parse_num).collect(),
        _ => Err(Error::InvalidInput(format!("bad grid '{s}'"))),
    }
}

/// `dir/stem_suffix.ext` for `dir/stem.whatever`.
fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn emit_report(
    report: &ExperimentReport,
    spec: &ExperimentSpec,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
    summarize: bool,
) -> Result<()> {
    match path {
        Some(path) => {
            report.save_csv(path)?;
            if summarize {
                let summary = sibling(path, "summary", "csv");
                report.write_summary_csv(std::io::BufWriter::new(File::create(&summary)?))?;
                let x = if spec.family == Family::IterationsVsRatio { "m" } else { "k" };
                let y = if spec.family == Family::IterationsVsRatio {
                    "mean_iterations"
                } else {
                    "success_rate"
                };
                let name = summary.file_name().and_then(|s| s.to_str()).unwrap_or("summary.csv");
                std::fs::write(sibling(path, "plot", "gp"), gnuplot_script(name, &spec.algorithms, x, y))?;
            }
        }
        None => report.write_csv(&mut *out)?,
    }
    if summarize {
        for s in report.summarize() {
            writeln!(
                err,
                "{:>6} m={:<5} k={:<4} success {}/{}  mean iterations {:.2}",
                s.algorithm, s.m, s.k, s.successes, s.trials, s.mean_iterations
            )?;
        }
    }
    Ok(())
}

fn rip(a: &RipArgs, out: &mut dyn Write) -> Result<()> {
    if a.m == 0 || a.n == 0 {
        return Err(Error::InvalidInput("m and n must be positive".into()));
    }
    let seed = derive_seed(a.seed, 0, 0, 0);
    let mut mat = gen_gaussian_matrix(a.m, a.n, seed);
    if a.normalize {
        optk::experiments::normalize_columns(&mut mat);
    } else {
        mat /= (a.m as f64).sqrt();
    }
    let est = rip_constant_bruteforce(&mat, a.order, a.guard)?;
    writeln!(out, "delta_{} = {:.12}", est.order, est.delta)?;
    writeln!(out, "witness = {}", est.witness_support)?;
    Ok(())
}

fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let mat = read_matrix(BufReader::new(File::open(&a.matrix)?))?;
    let y = read_vector(BufReader::new(File::open(&a.measurements)?))?;
    let p = ProblemInstance::new(mat, y, a.k)?;
    let algs = Algorithm::parse_list(&a.algs)?;
    let [alg] = algs.as_slice() else {
        return Err(Error::InvalidInput("solve takes exactly one algorithm".into()));
    };
    let x = match *alg {
        Algorithm::Iterative(v) => {
            let mut cfg = AlgorithmConfig::new(v);
            cfg.ground_truth_criterion = None;
            if let Some(m) = a.max_iter {
                cfg.max_iterations = m;
            }
            if let Some(t) = a.tol {
                cfg.residual_tolerance = t;
            }
            let (x, trace) = run(&p, &cfg, None, None)?;
            if let Some(path) = &a.trace {
                trace.save_csv(path)?;
            }
            x
        }
        Algorithm::L1 => optk::subsolvers::solve_l1_baseline(&p, &Default::default())?.x,
    };
    match &a.out {
        Some(path) => write_vector(std::io::BufWriter::new(File::create(path)?), &x)?,
        None => write_vector(&mut *out, &x)?,
    }
    Ok(())
}
