//! Outer iterations: IHT, HTP and the optimal k-thresholding family.
//!
//! Every variant starts from the unit-stepsize gradient point
//! `u = x + A^T (y - A x)` and differs only in how it selects k entries of `u`
//! and whether it refits on the selected support.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_guard, check_len, Error, Result};
use crate::model::{gradient_step, ProblemInstance, SparseSignal, SupportSet, Vector};
use crate::subsolvers::{
    least_squares_on_support, solve_binary_ot, solve_relaxed_ot, QpSettings, BINARY_OT_GUARD,
};
use crate::thresholding::hard_threshold;

const OT_ADVICE: &str = "OT/OTP enumerate all k-subsets; use ROT or ROTP at this size";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Iht,
    Htp,
    Ot,
    Otp,
    Rot,
    Rotp,
    Rotp2,
    Rotp3,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Iht,
        Variant::Htp,
        Variant::Ot,
        Variant::Otp,
        Variant::Rot,
        Variant::Rotp,
        Variant::Rotp2,
        Variant::Rotp3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Iht => "iht",
            Variant::Htp => "htp",
            Variant::Ot => "ot",
            Variant::Otp => "otp",
            Variant::Rot => "rot",
            Variant::Rotp => "rotp",
            Variant::Rotp2 => "rotp2",
            Variant::Rotp3 => "rotp3",
        }
    }

    /// Whether the variant ends with a least-squares refit.
    pub fn is_pursuit(self) -> bool {
        matches!(
            self,
            Variant::Htp | Variant::Otp | Variant::Rotp | Variant::Rotp2 | Variant::Rotp3
        )
    }

    /// Whether the variant enumerates k-subsets.
    pub fn is_exact(self) -> bool {
        matches!(self, Variant::Ot | Variant::Otp)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub variant: Variant,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Stop once `||y - A x||_2` is at most this.
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    #[serde(default)]
    pub qp: QpSettings,
    #[serde(default = "default_ot_guard")]
    pub ot_guard: u128,
    /// Stop once `||x - x_ref||_2 / ||x_ref||_2` is at most this (only when a reference is given).
    #[serde(default = "default_ground_truth_criterion")]
    pub ground_truth_criterion: Option<f64>,
    /// Fill per-iteration wall times; off by default so traces are reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_max_iterations() -> usize {
    50
}
fn default_residual_tolerance() -> f64 {
    1e-8
}
fn default_ot_guard() -> u128 {
    BINARY_OT_GUARD
}
fn default_ground_truth_criterion() -> Option<f64> {
    Some(1e-2)
}

impl AlgorithmConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            max_iterations: default_max_iterations(),
            residual_tolerance: default_residual_tolerance(),
            qp: QpSettings::default(),
            ot_guard: default_ot_guard(),
            ground_truth_criterion: default_ground_truth_criterion(),
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.residual_tolerance >= 0.0) {
            return Err(Error::invalid("residual_tolerance must be nonnegative"));
        }
        if let Some(c) = self.ground_truth_criterion {
            if !(c >= 0.0) {
                return Err(Error::invalid("ground_truth_criterion must be nonnegative"));
            }
        }
        self.qp.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    ResidualTol,
    GroundTruthCriterion,
    MaxIterations,
    /// A step produced a non-finite iterate; the trace ends at the last finite one.
    DegenerateInput,
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminationReason::ResidualTol => "residual_tol",
            TerminationReason::GroundTruthCriterion => "ground_truth_criterion",
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::DegenerateInput => "degenerate_input",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub residual: f64,
    pub support: SupportSet,
    /// `||x^p - x_ref||_2`, when a reference was supplied.
    pub error: Option<f64>,
    pub rel_error: Option<f64>,
    /// QP iterations spent producing this iterate (summed over compressions).
    pub inner_iterations: usize,
    /// False when some QP hit its iteration budget.
    pub qp_converged: bool,
    /// The selection hit a magnitude tie and was resolved by index order.
    pub tie: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
    pub termination: TerminationReason,
}

impl IterateTrace {
    /// Outer iterations performed, not counting `x^0`.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    /// CSV with columns `iteration,residual,support_size,rel_error,inner_iters,wall_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "residual",
            "support_size",
            "rel_error",
            "inner_iters",
            "wall_ms",
        ])?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                format!("{:e}", r.residual),
                r.support.len().to_string(),
                r.rel_error.map(|e| format!("{e:e}")).unwrap_or_default(),
                r.inner_iterations.to_string(),
                format!("{:.3}", r.wall_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// One outer step together with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub x: Vector,
    pub inner_iterations: usize,
    pub qp_converged: bool,
    pub tie: bool,
}

impl StepReport {
    fn plain(x: Vector, tie: bool) -> Self {
        Self {
            x,
            inner_iterations: 0,
            qp_converged: true,
            tie,
        }
    }
}

/// `H_k(x + A^T (y - A x))`.
pub fn iht_step(p: &ProblemInstance, x: &Vector) -> Result<Vector> {
    Ok(iht(p, x)?.x)
}

/// Support of `H_k(u)`, then least squares on it.
pub fn htp_step(p: &ProblemInstance, x: &Vector) -> Result<Vector> {
    Ok(htp(p, x)?.x)
}

/// `u (x) w*` with `w*` the exactly optimal k-indicator.
pub fn ot_step(p: &ProblemInstance, x: &Vector, guard: u128) -> Result<Vector> {
    Ok(ot(p, x, guard, false)?.x)
}

/// Least squares on the support chosen by [`ot_step`].
pub fn otp_step(p: &ProblemInstance, x: &Vector, guard: u128) -> Result<Vector> {
    Ok(ot(p, x, guard, true)?.x)
}

/// `H_k(u (x) w)` with `w` from the relaxed problem.
pub fn rot_step(p: &ProblemInstance, x: &Vector, qp: &QpSettings) -> Result<Vector> {
    Ok(relaxed(p, x, qp, 1, false)?.x)
}

/// Least squares on the support chosen by [`rot_step`].
pub fn rotp_step(p: &ProblemInstance, x: &Vector, qp: &QpSettings) -> Result<Vector> {
    Ok(relaxed(p, x, qp, 1, true)?.x)
}

/// ROTP with `compressions` successive relaxed problems (2 for ROTP2, 3 for ROTP3).
pub fn rotp_multi_step(
    p: &ProblemInstance,
    x: &Vector,
    qp: &QpSettings,
    compressions: usize,
) -> Result<Vector> {
    if !(2..=3).contains(&compressions) {
        return Err(Error::invalid(format!(
            "compressions must be 2 or 3, got {compressions}"
        )));
    }
    Ok(relaxed(p, x, qp, compressions, true)?.x)
}

/// Apply one step of `cfg.variant`.
pub fn step(p: &ProblemInstance, cfg: &AlgorithmConfig, x: &Vector) -> Result<StepReport> {
    match cfg.variant {
        Variant::Iht => iht(p, x),
        Variant::Htp => htp(p, x),
        Variant::Ot => ot(p, x, cfg.ot_guard, false),
        Variant::Otp => ot(p, x, cfg.ot_guard, true),
        Variant::Rot => relaxed(p, x, &cfg.qp, 1, false),
        Variant::Rotp => relaxed(p, x, &cfg.qp, 1, true),
        Variant::Rotp2 => relaxed(p, x, &cfg.qp, 2, true),
        Variant::Rotp3 => relaxed(p, x, &cfg.qp, 3, true),
    }
}

fn iht(p: &ProblemInstance, x: &Vector) -> Result<StepReport> {
    let u = gradient_step(p, x)?;
    let h = hard_threshold(&u, p.k())?;
    Ok(StepReport::plain(h.vector, h.tie))
}

fn htp(p: &ProblemInstance, x: &Vector) -> Result<StepReport> {
    let u = gradient_step(p, x)?;
    let h = hard_threshold(&u, p.k())?;
    Ok(StepReport::plain(least_squares_on_support(p, &h.support)?, h.tie))
}

fn ot(p: &ProblemInstance, x: &Vector, guard: u128, pursuit: bool) -> Result<StepReport> {
    let u = gradient_step(p, x)?;
    let sol = solve_binary_ot(p, &u, guard)?;
    let selected = u.component_mul(&sol.indicator.to_vector());
    let next = if pursuit {
        least_squares_on_support(p, &SupportSet::of_vector(&selected))?
    } else {
        selected
    };
    Ok(StepReport::plain(next, false))
}

fn relaxed(
    p: &ProblemInstance,
    x: &Vector,
    qp: &QpSettings,
    compressions: usize,
    pursuit: bool,
) -> Result<StepReport> {
    let mut v = gradient_step(p, x)?;
    let mut inner_iterations = 0;
    let mut qp_converged = true;
    for _ in 0..compressions {
        let w = solve_relaxed_ot(p, &v, qp)?;
        inner_iterations += w.iterations;
        qp_converged &= w.converged();
        v.component_mul_assign(&w.w);
    }
    let h = hard_threshold(&v, p.k())?;
    let next = if pursuit {
        least_squares_on_support(p, &h.support)?
    } else {
        h.vector
    };
    Ok(StepReport {
        x: next,
        inner_iterations,
        qp_converged,
        tie: h.tie,
    })
}

/// Iterate `cfg.variant` from `x0` (zero when `None`).
///
/// After every iterate the ground-truth criterion (when `x_ref` is given) is
/// checked first, then the residual tolerance, then the iteration cap.
pub fn run(
    p: &ProblemInstance,
    cfg: &AlgorithmConfig,
    x0: Option<&Vector>,
    x_ref: Option<&SparseSignal>,
) -> Result<(Vector, IterateTrace)> {
    cfg.validate()?;
    let n = p.cols();
    if cfg.variant.is_exact() {
        check_guard(n, p.k(), cfg.ot_guard, OT_ADVICE)?;
    }
    let mut x = match x0 {
        Some(x0) => {
            check_len("run: x0", n, x0.len())?;
            x0.clone()
        }
        None => Vector::zeros(n),
    };
    if let Some(r) = x_ref {
        check_len("run: x_ref", n, r.len())?;
    }
    let ref_norm = x_ref.map(|r| r.values().norm());

    let record = |iteration: usize, x: &Vector, step: Option<&StepReport>, wall_ms: f64| {
        let error = x_ref.map(|r| (x - r.values()).norm());
        IterateRecord {
            iteration,
            residual: p.residual(x).norm(),
            support: SupportSet::of_vector(x),
            error,
            rel_error: error.zip(ref_norm).map(|(e, r)| e / r),
            inner_iterations: step.map_or(0, |s| s.inner_iterations),
            qp_converged: step.is_none_or(|s| s.qp_converged),
            tie: step.is_some_and(|s| s.tie),
            wall_ms,
        }
    };

    let mut records = vec![record(0, &x, None, 0.0)];
    let termination = loop {
        let last = records.last().expect("x0 is recorded");
        if let (Some(c), Some(rel)) = (cfg.ground_truth_criterion, last.rel_error) {
            if rel <= c {
                break TerminationReason::GroundTruthCriterion;
            }
        }
        if last.residual <= cfg.residual_tolerance {
            break TerminationReason::ResidualTol;
        }
        if last.iteration >= cfg.max_iterations {
            break TerminationReason::MaxIterations;
        }
        let start = cfg.record_timing.then(Instant::now);
        let s = step(p, cfg, &x)?;
        let wall_ms = start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3);
        if s.x.iter().any(|v| !v.is_finite()) {
            break TerminationReason::DegenerateInput;
        }
        let rec = record(last.iteration + 1, &s.x, Some(&s), wall_ms);
        if !rec.residual.is_finite() {
            break TerminationReason::DegenerateInput;
        }
        records.push(rec);
        x = s.x;
    };
    Ok((
        x,
        IterateTrace {
            records,
            termination,
        },
    ))
}
