//! Restricted isometry constants, convergence constants and residual bounds.

use itertools::Itertools;
use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{check_guard, Error, Result};
use crate::model::{Matrix, ProblemInstance, SupportSet, Vector};
use crate::subsolvers::RelaxedWeight;
use crate::thresholding::{best_k_term_error, hard_threshold};

pub const RIP_GUARD: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub order: usize,
    pub delta: f64,
    /// A support on which `delta` is attained.
    pub witness_support: SupportSet,
}

/// `(lambda_min, lambda_max)` of a symmetric matrix.
fn extreme_eigenvalues(g: Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(g).eigenvalues;
    (eig.min(), eig.max())
}

/// Isometry defect `max(lambda_max - 1, 1 - lambda_min)` of `A_S^T A_S`.
pub fn support_isometry_defect(a: &Matrix, s: &SupportSet) -> f64 {
    let sub = a.select_columns(s.indices());
    let (lo, hi) = extreme_eigenvalues(sub.tr_mul(&sub));
    (hi - 1.0).max(1.0 - lo).max(0.0)
}

/// `delta_K` by solving one `K x K` eigenproblem per support.
pub fn rip_constant_bruteforce(a: &Matrix, order: usize, guard: u128) -> Result<RipEstimate> {
    let n = a.ncols();
    if order == 0 || order > n {
        return Err(Error::invalid(format!("RIP order {order} outside 1..={n}")));
    }
    check_guard(n, order, guard, "reduce K or n for brute-force RIP")?;
    let gram = a.tr_mul(a);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for s in (0..n).combinations(order) {
        let g = Matrix::from_fn(order, order, |i, j| gram[(s[i], s[j])]);
        let (lo, hi) = extreme_eigenvalues(g);
        let d = (hi - 1.0).max(1.0 - lo).max(0.0);
        if d > best.0 {
            best = (d, s);
        }
    }
    Ok(RipEstimate {
        order,
        delta: best.0,
        witness_support: SupportSet::new(best.1)?,
    })
}

/// `lambda_max(A^T A)`, from the smaller of the two Gram matrices.
pub fn lambda_max(a: &Matrix) -> f64 {
    let g = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.tr_mul(a)
    };
    extreme_eigenvalues(g).1.max(0.0)
}

/// The real root of `t^3 + t^2 + t = 1`, by bisection on `[0, 1]`.
pub fn tau_star() -> f64 {
    let f = |t: f64| t * t * t + t * t + t - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_delta(name: &str, d: f64) -> Result<()> {
    if (0.0..1.0).contains(&d) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {d} must lie in [0, 1)")))
    }
}

fn after_contraction(factor: f64, c: f64) -> Option<f64> {
    (factor < 1.0).then(|| c / (1.0 - factor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtConstants {
    pub rho: f64,
    /// `None` when `rho >= 1`.
    pub c: Option<f64>,
}

/// Contraction factor and noise constant for OT and OTP.
pub fn ot_constants(delta2k: f64) -> Result<OtConstants> {
    check_delta("delta_2k", delta2k)?;
    let rho = delta2k * ((1.0 + delta2k) / (1.0 - delta2k)).sqrt();
    Ok(OtConstants {
        rho,
        c: after_contraction(rho, (3.0 + delta2k) / (1.0 - delta2k).sqrt()),
    })
}

/// Asymptotic rate of OT and OTP near the solution.
pub fn local_rate(deltak: f64) -> Result<f64> {
    check_delta("delta_k", deltak)?;
    Ok(deltak * ((1.0 + deltak) / (1.0 - deltak)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotConstants {
    pub varrho: f64,
    pub c_rot: Option<f64>,
    pub varrho_pursuit: f64,
    pub c_star: Option<f64>,
}

/// Contraction factors and noise constants for ROT and ROTP.
pub fn rot_constants(deltak: f64, delta2k: f64, delta3k: f64) -> Result<RotConstants> {
    check_delta("delta_k", deltak)?;
    check_delta("delta_2k", delta2k)?;
    check_delta("delta_3k", delta3k)?;
    if !(deltak <= delta2k && delta2k <= delta3k) {
        return Err(Error::Domain(format!(
            "need delta_k <= delta_2k <= delta_3k, got {deltak}, {delta2k}, {delta3k}"
        )));
    }
    let (dk, d2, d3) = (deltak, delta2k, delta3k);
    let varrho = (d2 + 2.0 * d3) * ((1.0 + dk) / (1.0 - d2)).sqrt() + d3;
    let c_rot = after_contraction(varrho, (5.0 + 3.0 * dk) / (1.0 - d2).sqrt() + (1.0 + dk).sqrt());
    let shrink = (1.0 - d2 * d2).sqrt();
    let varrho_pursuit = varrho / shrink;
    let c_star = after_contraction(
        varrho_pursuit,
        (5.0 + 3.0 * dk) / ((1.0 - d2) * (1.0 + d2).sqrt())
            + (1.0 + dk).sqrt() / shrink
            + (1.0 + dk).sqrt() / (1.0 - d2),
    );
    Ok(RotConstants {
        varrho,
        c_rot,
        varrho_pursuit,
        c_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConstants {
    pub rho: f64,
    pub c: Option<f64>,
    pub varrho: f64,
    pub c_rot: Option<f64>,
    pub varrho_pursuit: f64,
    pub c_star: Option<f64>,
    pub tau_star: f64,
}

impl ConvergenceConstants {
    pub fn from_deltas(deltak: f64, delta2k: f64, delta3k: f64) -> Result<Self> {
        let ot = ot_constants(delta2k)?;
        let rot = rot_constants(deltak, delta2k, delta3k)?;
        Ok(Self {
            rho: ot.rho,
            c: ot.c,
            varrho: rot.varrho,
            c_rot: rot.c_rot,
            varrho_pursuit: rot.varrho_pursuit,
            c_star: rot.c_star,
            tau_star: tau_star(),
        })
    }

    /// `(factor, noise constant)` governing `which`.
    pub fn for_bound(&self, which: BoundKind) -> (f64, Option<f64>) {
        match which {
            BoundKind::Ot => (self.rho, self.c),
            BoundKind::Rot => (self.varrho, self.c_rot),
            BoundKind::Rotp => (self.varrho_pursuit, self.c_star),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// OT and OTP.
    Ot,
    Rot,
    Rotp,
}

/// `factor^p * initial_error + C * noise_norm`; infinite when the factor is not a contraction.
pub fn error_bound(
    constants: &ConvergenceConstants,
    p_index: usize,
    initial_error: f64,
    noise_norm: f64,
    which: BoundKind,
) -> f64 {
    match constants.for_bound(which) {
        (factor, Some(c)) if factor < 1.0 => {
            factor.powi(p_index.min(i32::MAX as usize) as i32) * initial_error + c * noise_norm
        }
        _ => f64::INFINITY,
    }
}

/// Both sides of the residual perturbation bound for hard thresholding `u`:
/// `| ||y - A H_k(u)||^2 - ||y - A u||^2 |` and
/// `2 ||A^T (y - A u)||_inf sigma_k(u)_1 + lambda_max(A^T A) sigma_k(u)_1^2`.
pub fn compressibility_gap(p: &ProblemInstance, u: &Vector) -> Result<(f64, f64)> {
    p.check_signal("compressibility_gap", u)?;
    let hat = hard_threshold(u, p.k())?.vector;
    let lhs = (p.residual(&hat).norm_squared() - p.residual(u).norm_squared()).abs();
    let sigma = best_k_term_error(u, p.k())?;
    let rhs = 2.0 * p.correlation(u).amax() * sigma + lambda_max(p.a()) * sigma * sigma;
    Ok((lhs, rhs))
}

/// Quantities behind the sufficient condition for `H_k(u (x) w)` to be no
/// worse than the best binary selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaCheck {
    /// The threshold on `sigma_k(u (x) w)_1`.
    pub omega: f64,
    pub sigma: f64,
    /// `||y - A x+||^2` for the H_k representative `x+` of `u (x) w`.
    pub next_residual_sq: f64,
    pub alpha_star: f64,
}

impl OmegaCheck {
    pub fn condition_met(&self) -> bool {
        self.sigma <= self.omega
    }

    /// The conclusion `||y - A x+||^2 <= alpha*`, with a relative rounding slack.
    pub fn conclusion_holds(&self) -> bool {
        self.next_residual_sq <= self.alpha_star * (1.0 + 1e-12) + 1e-12
    }
}

/// Evaluate the threshold with `gamma` taken as the objective attained by `w`.
///
/// Using the attained value keeps the implication exact for an approximate
/// relaxed solution, since the perturbation bound holds for any `w`.
pub fn omega_threshold(
    p: &ProblemInstance,
    u: &Vector,
    w: &RelaxedWeight,
    alpha_star: f64,
) -> Result<OmegaCheck> {
    p.check_signal("omega_threshold", u)?;
    p.check_signal("omega_threshold: w", &w.w)?;
    let uw = u.component_mul(&w.w);
    let r = p.residual(&uw);
    let gamma = r.norm_squared();
    let gap = alpha_star - gamma;
    if gap < -1e-9 * (1.0 + alpha_star.abs()) {
        return Err(Error::Domain(format!(
            "alpha* = {alpha_star} is below the relaxed value {gamma}"
        )));
    }
    let phi = 2.0 * p.a().tr_mul(&r).amax();
    let lam = lambda_max(p.a());
    let omega = if lam == 0.0 {
        f64::INFINITY
    } else {
        (-phi + (phi * phi + 4.0 * gap.max(0.0) * lam).sqrt()) / (2.0 * lam)
    };
    let next = hard_threshold(&uw, p.k())?.vector;
    Ok(OmegaCheck {
        omega,
        sigma: best_k_term_error(&uw, p.k())?,
        next_residual_sq: p.residual(&next).norm_squared(),
        alpha_star,
    })
}
