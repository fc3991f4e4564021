//! Euclidean projection onto the capped simplex `{ w : 0 <= w <= e, e^T w = k }`.

use crate::error::{Error, Result};
use crate::model::Vector;

/// `argmin ||w - v||_2` over the capped simplex.
///
/// The minimizer is `w_i = clamp(v_i - lambda, 0, 1)` where `lambda` solves
/// `sum_i clamp(v_i - lambda, 0, 1) = k`. The left side is piecewise linear
/// and nonincreasing in `lambda` with kinks at `v_i - 1` and `v_i`; the
/// crossing segment is located by binary search over the sorted kinks and
/// solved exactly, followed by one correction on the free coordinates.
pub fn project_capped_simplex(v: &Vector, k: usize) -> Result<Vector> {
    let n = v.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "capped simplex needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("cannot project a non-finite vector"));
    }
    if k == n {
        return Ok(Vector::from_element(n, 1.0));
    }
    let target = k as f64;
    let mass = |lambda: f64| -> f64 { v.iter().map(|x| (x - lambda).clamp(0.0, 1.0)).sum() };

    let mut kinks: Vec<f64> = v.iter().flat_map(|&x| [x - 1.0, x]).collect();
    kinks.sort_unstable_by(f64::total_cmp);
    kinks.dedup();

    // mass(kinks[0]) = n >= k and mass(kinks[last]) = 0 < k.
    let (mut lo, mut hi) = (0usize, kinks.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mass(kinks[mid]) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (kinks[lo], kinks[hi]);
    let (fa, fb) = (mass(a), mass(b));
    let mut lambda = if fa == fb {
        a
    } else {
        a + (fa - target) / (fa - fb) * (b - a)
    };

    let mut w = v.map(|x| (x - lambda).clamp(0.0, 1.0));
    let free: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0 && w[i] < 1.0).collect();
    if !free.is_empty() {
        let excess = w.sum() - target;
        if excess != 0.0 {
            lambda += excess / free.len() as f64;
            for &i in &free {
                w[i] = (v[i] - lambda).clamp(0.0, 1.0);
            }
        }
    }
    Ok(w)
}

/// Largest violation of the capped simplex constraints.
pub fn capped_simplex_violation(w: &Vector, k: usize) -> f64 {
    let bounds = w
        .iter()
        .map(|&x| (-x).max(x - 1.0).max(0.0))
        .fold(0.0, f64::max);
    bounds.max((w.sum() - k as f64).abs())
}
