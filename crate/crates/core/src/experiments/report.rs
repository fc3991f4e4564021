//! Report rows, CSV output and per-grid-point summaries.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::spec::{Algorithm, Family};
use crate::error::Result;

pub const REPORT_COLUMNS: [&str; 12] = [
    "family",
    "algorithm",
    "m",
    "n",
    "k",
    "trial",
    "seed",
    "iterations",
    "final_residual",
    "rel_error",
    "success",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub family: Family,
    pub algorithm: Algorithm,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub iterations: usize,
    pub final_residual: f64,
    pub rel_error: f64,
    pub success: bool,
    pub wall_ms: f64,
}

impl ReportRow {
    fn fields(&self) -> [String; 12] {
        [
            self.family.to_string(),
            self.algorithm.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.iterations.to_string(),
            format!("{:e}", self.final_residual),
            format!("{:e}", self.rel_error),
            self.success.to_string(),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub success_threshold: f64,
    pub rows: Vec<ReportRow>,
}

/// Aggregate over the trials of one (algorithm, m, n, k) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub mean_iterations: f64,
}

impl SummaryRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

impl ExperimentReport {
    pub fn new(success_threshold: f64, rows: Vec<ReportRow>) -> Self {
        Self {
            success_threshold,
            rows,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.fields())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Summaries keyed by `(algorithm, m, n, k)`, in that order.
    pub fn summarize(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(Algorithm, usize, usize, usize), (usize, usize, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = groups.entry((r.algorithm, r.m, r.n, r.k)).or_default();
            e.0 += 1;
            e.1 += usize::from(r.success);
            e.2 += r.iterations;
        }
        groups
            .into_iter()
            .map(|((algorithm, m, n, k), (trials, successes, iters))| SummaryRow {
                algorithm,
                m,
                n,
                k,
                trials,
                successes,
                mean_iterations: iters as f64 / trials as f64,
            })
            .collect()
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algorithm", "m", "n", "k", "trials", "successes", "success_rate", "mean_iterations"])?;
        for s in self.summarize() {
            w.write_record([
                s.algorithm.to_string(),
                s.m.to_string(),
                s.n.to_string(),
                s.k.to_string(),
                s.trials.to_string(),
                s.successes.to_string(),
                format!("{}", s.success_rate()),
                format!("{}", s.mean_iterations),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A gnuplot script plotting column `y_column` against `x_column` of a summary CSV, one curve per algorithm.
pub fn gnuplot_script(summary_csv: &str, algorithms: &[Algorithm], x_column: &str, y_column: &str) -> String {
    let col = |name: &str| {
        ["algorithm", "m", "n", "k", "trials", "successes", "success_rate", "mean_iterations"]
            .iter()
            .position(|c| *c == name)
            .map_or(1, |i| i + 1)
    };
    let (xc, yc) = (col(x_column), col(y_column));
    let mut s = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x_column}'\nset ylabel '{y_column}'\nplot "
    );
    let curves: Vec<String> = algorithms
        .iter()
        .map(|a| {
            format!(
                "'{summary_csv}' using (strcol(1) eq '{a}' ? ${xc} : 1/0):{yc} with linespoints title '{a}'"
            )
        })
        .collect();
    s.push_str(&curves.join(", \\\n     "));
    s.push('\n');
    s
}
