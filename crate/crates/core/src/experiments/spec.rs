//! Experiment configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::Variant;
use crate::error::{Error, Result};
use crate::model::NoiseModel;
use crate::subsolvers::{L1Settings, QpSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Residual trajectories of each algorithm on shared instances.
    Trajectory,
    /// Outer iterations needed to meet the recovery criterion, over a grid of `m / n`.
    IterationsVsRatio,
    /// Fraction of successful recoveries over a sparsity grid.
    SuccessFrequency,
}

impl Family {
    pub fn id(self) -> u64 {
        match self {
            Family::Trajectory => 1,
            Family::IterationsVsRatio => 2,
            Family::SuccessFrequency => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Trajectory => "trajectory",
            Family::IterationsVsRatio => "iterations_vs_ratio",
            Family::SuccessFrequency => "success_frequency",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An outer iteration, or the basis-pursuit baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    Iterative(Variant),
    L1,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iterative(v) => v.name(),
            Algorithm::L1 => "l1",
        }
    }

    /// Parse a comma-separated list such as `"htp,rotp,l1"`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Algorithm::L1),
            other => other.parse().map(Algorithm::Iterative),
        }
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> Self {
        a.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: Family,
    /// Rows of `A`; ignored by `iterations_vs_ratio`, which takes `m = floor(beta n)`.
    #[serde(default)]
    pub m: usize,
    pub n: usize,
    /// `m / n` values for `iterations_vs_ratio`.
    #[serde(default)]
    pub beta_grid: Vec<f64>,
    /// Sparsity levels `||x*||_0`; ignored by `iterations_vs_ratio`, which takes `k = floor(m / 10)`.
    #[serde(default)]
    pub sparsity_grid: Vec<usize>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_success_threshold")]
    pub success_threshold: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default)]
    pub qp: QpSettings,
    #[serde(default)]
    pub l1: L1Settings,
    /// Rescale columns of `A` to unit norm after drawing.
    #[serde(default)]
    pub normalize_columns: bool,
    /// Measure wall-clock time per run; off keeps reports byte-reproducible.
    #[serde(default)]
    pub timing: bool,
}

fn default_success_threshold() -> f64 {
    1e-2
}
fn default_max_iterations() -> usize {
    50
}
fn default_residual_tolerance() -> f64 {
    1e-8
}

impl ExperimentSpec {
    /// A spec with default settings and no grids.
    pub fn new(family: Family, m: usize, n: usize, trials: usize, algorithms: Vec<Algorithm>) -> Self {
        Self {
            family,
            m,
            n,
            beta_grid: Vec::new(),
            sparsity_grid: Vec::new(),
            trials,
            algorithms,
            noise: NoiseModel::NOISELESS,
            master_seed: 0,
            success_threshold: default_success_threshold(),
            max_iterations: default_max_iterations(),
            residual_tolerance: default_residual_tolerance(),
            qp: QpSettings::default(),
            l1: L1Settings::default(),
            normalize_columns: false,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.residual_tolerance >= 0.0) || !(self.success_threshold >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        self.noise.validate()?;
        self.qp.validate()?;
        self.l1.validate()?;
        match self.family {
            Family::IterationsVsRatio => {
                if self.beta_grid.is_empty() {
                    return bad("beta_grid is empty".into());
                }
                for &b in &self.beta_grid {
                    if !(b > 0.0 && b < 1.0) {
                        return bad(format!("beta = {b} outside (0, 1)"));
                    }
                    if (b * self.n as f64).floor() < 10.0 {
                        return bad(format!("beta = {b} gives m < 10, so k = floor(m/10) = 0"));
                    }
                }
            }
            Family::Trajectory | Family::SuccessFrequency => {
                if self.m == 0 {
                    return bad("m must be at least 1".into());
                }
                if self.sparsity_grid.is_empty() {
                    return bad("sparsity_grid is empty".into());
                }
                if let Some(&k) = self.sparsity_grid.iter().find(|&&k| k == 0 || k > self.n) {
                    return bad(format!("sparsity {k} outside 1..={}", self.n));
                }
            }
        }
        Ok(())
    }

    /// `(m, k)` at each grid point.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        match self.family {
            Family::IterationsVsRatio => self
                .beta_grid
                .iter()
                .map(|&b| {
                    let m = (b * self.n as f64).floor() as usize;
                    (m, m / 10)
                })
                .collect(),
            Family::Trajectory | Family::SuccessFrequency => {
                self.sparsity_grid.iter().map(|&k| (self.m, k)).collect()
            }
        }
    }
}

/// `beta` values `start, start + step, ...` up to `stop` inclusive (with rounding slack).
pub fn ratio_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}
