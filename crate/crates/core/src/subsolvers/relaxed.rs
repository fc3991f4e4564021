//! Convex relaxation of optimal k-thresholding:
//! `min ||y - A (u (x) w)||_2^2` over the capped simplex.
//!
//! With `B = A diag(u)` the objective is `g(w) = ||y - B w||^2`, whose gradient
//! `-2 B^T (y - B w)` is Lipschitz with constant `2 lambda_max(B^T B)`. The
//! solver runs accelerated projected gradient with a function-value restart:
//! whenever the extrapolated step would raise the objective, momentum is
//! dropped and a plain projected step is taken from the current iterate, so
//! accepted objectives never increase. Every few iterations the active face
//! (coordinates at 0, at 1, and free) is read off the iterate and the
//! objective is minimized on that face in closed form; the result replaces the
//! iterate when it is feasible and better.

use serde::{Deserialize, Serialize};

use super::active_set;
use super::projection::project_capped_simplex;
use crate::error::{Error, Result};
use crate::model::{Matrix, ProblemInstance, Vector};
use crate::thresholding::hard_threshold;

const POWER_ITERATIONS: usize = 50;
const POWER_TOLERANCE: f64 = 1e-6;
const LIPSCHITZ_SAFETY: f64 = 1.01;
const POLISH_PERIOD: usize = 50;
const ACTIVE_SET_STEPS_PER_COLUMN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QpSettings {
    /// Stop once `||w - P(w - grad g(w) / L)||_2` falls below this.
    pub tolerance: f64,
    pub max_inner_iterations: usize,
    /// Nesterov extrapolation between projected steps.
    pub acceleration: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_inner_iterations: 5000,
            acceleration: true,
        }
    }
}

impl QpSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("QP tolerance must be positive"));
        }
        if self.max_inner_iterations == 0 {
            return Err(Error::invalid("QP needs at least one inner iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Converged,
    /// Iteration budget exhausted; the weight is the best iterate seen.
    IterationLimit,
    /// `u (x) w` cannot depend on `w` (zero `u` or zero columns); any feasible weight is optimal.
    Degenerate,
}

/// A point of the capped simplex returned by [`solve_relaxed_ot`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedWeight {
    pub w: Vector,
    /// `||y - A (u (x) w)||_2^2`.
    pub attained_objective: f64,
    /// Projected-gradient-mapping norm at `w` (in weight units).
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: QpStatus,
}

impl RelaxedWeight {
    pub fn converged(&self) -> bool {
        self.status != QpStatus::IterationLimit
    }
}

struct Operator<'a> {
    a: &'a Matrix,
    u: &'a Vector,
}

impl Operator<'_> {
    /// `B w = A (u (x) w)`
    fn apply(&self, w: &Vector) -> Vector {
        self.a * self.u.component_mul(w)
    }

    /// `B^T r = u (x) (A^T r)`
    fn apply_t(&self, r: &Vector) -> Vector {
        self.a.tr_mul(r).component_mul(self.u)
    }

    fn lipschitz(&self) -> f64 {
        let n = self.u.len();
        let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut estimate = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let next = self.apply_t(&self.apply(&v));
            let norm = next.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v = next / norm;
            let converged = (norm - estimate).abs() <= POWER_TOLERANCE * norm;
            estimate = norm;
            if converged {
                break;
            }
        }
        2.0 * estimate * LIPSCHITZ_SAFETY
    }
}

fn objective(y: &Vector, bw: &Vector) -> f64 {
    (y - bw).norm_squared()
}

/// Solve the relaxed optimal k-thresholding problem for the vector `u`.
pub fn solve_relaxed_ot(
    p: &ProblemInstance,
    u: &Vector,
    settings: &QpSettings,
) -> Result<RelaxedWeight> {
    p.check_signal("solve_relaxed_ot", u)?;
    settings.validate()?;
    let (n, k, y) = (p.cols(), p.k(), p.y());
    let op = Operator { a: p.a(), u };

    let mut lip = op.lipschitz();
    if lip == 0.0 || !lip.is_finite() {
        let w = Vector::from_element(n, k as f64 / n as f64);
        let bw = op.apply(&w);
        return Ok(RelaxedWeight {
            attained_objective: objective(y, &bw),
            w,
            kkt_residual: 0.0,
            iterations: 0,
            status: QpStatus::Degenerate,
        });
    }

    // start from the hard-thresholding indicator of u
    let mut w = hard_threshold(u, k)?.selected.indicator(n);
    let mut bw = op.apply(&w);
    let mut f = objective(y, &bw);
    let mut w_prev = w.clone();
    let mut bw_prev = bw.clone();
    let mut momentum = 1.0f64;
    let mut status = QpStatus::IterationLimit;
    let mut iterations = 0;
    let mut gram = None;

    let mapping = |w: &Vector, bw: &Vector, lip: f64| -> Result<f64> {
        let grad = op.apply_t(&(y - bw)) * -2.0;
        let stepped = project_capped_simplex(&(w - grad / lip), k)?;
        Ok((w - stepped).norm())
    };

    for it in 1..=settings.max_inner_iterations {
        iterations = it;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = if settings.acceleration {
            (momentum - 1.0) / next_momentum
        } else {
            0.0
        };
        let z = &w + (&w - &w_prev) * beta;
        let bz = &bw + (&bw - &bw_prev) * beta;
        let grad = op.apply_t(&(y - &bz)) * -2.0;
        let mut w_new = project_capped_simplex(&(&z - grad / lip), k)?;
        let mut bw_new = op.apply(&w_new);
        let mut f_new = objective(y, &bw_new);
        let mut moved = (&w_new - &z).norm();
        momentum = next_momentum;

        if f_new > f {
            // restart from w with a plain step, backtracking if L was underestimated
            momentum = 1.0;
            let grad_w = op.apply_t(&(y - &bw)) * -2.0;
            let mut accepted = false;
            for _ in 0..60 {
                w_new = project_capped_simplex(&(&w - &grad_w / lip), k)?;
                bw_new = op.apply(&w_new);
                f_new = objective(y, &bw_new);
                if f_new <= f {
                    accepted = true;
                    break;
                }
                if f_new <= f * (1.0 + 4.0 * f64::EPSILON) {
                    // rounding-level stall: a stationary point to machine precision
                    break;
                }
                lip *= 2.0;
            }
            if !accepted {
                w_new = w.clone();
                bw_new = bw.clone();
                f_new = f;
            }
            moved = (&w_new - &w).norm();
        }
        debug_assert!(f_new <= f, "objective increased: {f} -> {f_new}");

        w_prev = std::mem::replace(&mut w, w_new);
        bw_prev = std::mem::replace(&mut bw, bw_new);
        f = f_new;

        let mut check = moved <= settings.tolerance;
        if it == 1 || it % POLISH_PERIOD == 0 || check {
            if let Some((wp, bwp, fp)) = subspace_phase(p, &op, &mut gram, &w, f)? {
                w_prev = wp.clone();
                bw_prev = bwp.clone();
                w = wp;
                bw = bwp;
                f = fp;
                momentum = 1.0;
                check = true;
            }
        }
        if check && mapping(&w, &bw, lip)? <= settings.tolerance {
            status = QpStatus::Converged;
            break;
        }
    }

    let kkt_residual = mapping(&w, &bw, lip)?;
    Ok(RelaxedWeight {
        w,
        attained_objective: f,
        kkt_residual,
        iterations,
        status,
    })
}

/// Quadratic data `H = B^T B`, `c = B^T y`, formed on first use.
struct Gram {
    h: Matrix,
    c: Vector,
}

impl Gram {
    fn new(p: &ProblemInstance, op: &Operator<'_>) -> Self {
        let mut b = p.a().clone();
        for (j, mut col) in b.column_iter_mut().enumerate() {
            col *= op.u[j];
        }
        Self {
            h: b.tr_mul(&b),
            c: b.tr_mul(p.y()),
        }
    }
}

/// Run the active-set method from the vertex nearest `w`; returns the result
/// when it improves on `f`.
fn subspace_phase(
    p: &ProblemInstance,
    op: &Operator<'_>,
    gram: &mut Option<Gram>,
    w: &Vector,
    f: f64,
) -> Result<Option<(Vector, Vector, f64)>> {
    let gram = gram.get_or_insert_with(|| Gram::new(p, op));
    let vertex = hard_threshold(w, p.k())?.selected.indicator(p.cols());
    let max_steps = ACTIVE_SET_STEPS_PER_COLUMN * p.cols();
    let reached = active_set::solve_from_vertex(&gram.h, &gram.c, p.k(), &vertex, max_steps);
    let cand = project_capped_simplex(&reached, p.k())?;
    let bw = op.apply(&cand);
    let fc = objective(p.y(), &bw);
    Ok((fc < f).then_some((cand, bw, fc)))
}
