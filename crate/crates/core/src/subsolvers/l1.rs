//! Basis pursuit `min ||x||_1 s.t. Ax = y` by ADMM, used as a recovery baseline.
//!
//! The splitting alternates a projection onto `{x : Ax = y}` with entrywise
//! soft thresholding. The solver stops when both the primal gap `||x - z||_2`
//! and the change in `z` fall below `tolerance * max(1, ||x||_2)`. The
//! penalty is rebalanced whenever one residual dominates the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Matrix, ProblemInstance, Vector};

const INITIAL_PENALTY: f64 = 1.0;
const BALANCE_RATIO: f64 = 10.0;
const PENALTY_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct L1Settings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for L1Settings {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 20_000,
        }
    }
}

impl L1Settings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("l1 tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("l1 needs at least one iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Solution {
    /// The last projected iterate, so `Ax = y` holds to rounding.
    pub x: Vector,
    pub iterations: usize,
    pub converged: bool,
}

struct AffineProjector {
    a: Matrix,
    y: Vector,
    /// Applies `(A A^T)^+`.
    gram_inv: Box<dyn Fn(&Vector) -> Vector>,
}

impl AffineProjector {
    fn new(a: &Matrix, y: &Vector) -> Self {
        let gram = a * a.transpose();
        let scale = gram.norm().max(f64::MIN_POSITIVE);
        let gram_inv: Box<dyn Fn(&Vector) -> Vector> = match gram.clone().cholesky() {
            Some(ch) => Box::new(move |r| ch.solve(r)),
            None => {
                let pinv = (a * a.transpose())
                    .pseudo_inverse(1e-12 * scale)
                    .expect("nonnegative epsilon");
                Box::new(move |r| &pinv * r)
            }
        };
        Self {
            a: a.clone(),
            y: y.clone(),
            gram_inv,
        }
    }

    fn project(&self, v: &Vector) -> Vector {
        let r = &self.a * v - &self.y;
        v - self.a.tr_mul(&(self.gram_inv)(&r))
    }
}

fn soft(v: &Vector, t: f64) -> Vector {
    v.map(|x| x.signum() * (x.abs() - t).max(0.0))
}

pub fn solve_l1_baseline(p: &ProblemInstance, settings: &L1Settings) -> Result<L1Solution> {
    settings.validate()?;
    let n = p.cols();
    if p.y().iter().all(|&v| v == 0.0) {
        return Ok(L1Solution {
            x: Vector::zeros(n),
            iterations: 0,
            converged: true,
        });
    }
    let proj = AffineProjector::new(p.a(), p.y());
    let mut z = Vector::zeros(n);
    let mut dual = Vector::zeros(n);
    let mut x = proj.project(&z);
    let mut penalty = INITIAL_PENALTY;
    for it in 1..=settings.max_iterations {
        x = proj.project(&(&z - &dual));
        let z_prev = std::mem::replace(&mut z, soft(&(&x + &dual), 1.0 / penalty));
        dual += &x - &z;
        let primal = (&x - &z).norm();
        let change = (&z - &z_prev).norm();
        let scale = settings.tolerance * x.norm().max(1.0);
        if primal <= scale && change <= scale {
            return Ok(L1Solution {
                x,
                iterations: it,
                converged: true,
            });
        }
        // dual must stay scaled by the current penalty
        if primal > BALANCE_RATIO * change {
            penalty *= PENALTY_FACTOR;
            dual /= PENALTY_FACTOR;
        } else if change > BALANCE_RATIO * primal {
            penalty /= PENALTY_FACTOR;
            dual *= PENALTY_FACTOR;
        }
    }
    Ok(L1Solution {
        x,
        iterations: settings.max_iterations,
        converged: false,
    })
}
