//! Hard k-thresholding and the best k-term approximation error.
//!
//! `H_k` is set-valued when the k-th and (k+1)-th largest magnitudes tie. The
//! representative returned here is fixed by ordering entries by magnitude
//! (descending) and then by index (ascending), so every run selects the same
//! support. Magnitudes are compared exactly.

use std::cmp::Ordering;

use itertools::Itertools;

use crate::error::{check_guard, Error, Result};
use crate::model::{SupportSet, Vector};

/// Default bound on `C(n, k)` for [`enumerate_optimal_indicators`].
pub const INDICATOR_ENUMERATION_GUARD: u128 = 1_000_000;

/// A 0-1 vector of length `n` with exactly `k` ones, stored by its ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndicatorVector {
    ones: SupportSet,
    len: usize,
}

impl IndicatorVector {
    pub fn new(ones: SupportSet, len: usize) -> Result<Self> {
        if ones.max_index().is_some_and(|i| i >= len) {
            return Err(Error::invalid("indicator index out of range"));
        }
        Ok(Self { ones, len })
    }

    pub fn ones(&self) -> &SupportSet {
        &self.ones
    }

    /// Number of ones.
    pub fn k(&self) -> usize {
        self.ones.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn to_vector(&self) -> Vector {
        self.ones.indicator(self.len)
    }
}

/// One representative of `H_k(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    /// `z` with everything outside the k selected entries zeroed.
    pub vector: Vector,
    /// Nonzero entries of `vector`; at most k indices.
    pub support: SupportSet,
    /// The k selected indices, including any selected zeros.
    pub selected: SupportSet,
    /// Whether `z*_k == z*_{k+1}`, i.e. `H_k(z)` holds more than one vector.
    pub tie: bool,
}

impl ThresholdResult {
    pub fn indicator(&self) -> IndicatorVector {
        IndicatorVector {
            ones: self.selected.clone(),
            len: self.vector.len(),
        }
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::invalid(format!(
            "sparsity level k = {k} outside 1..={n}"
        )))
    } else {
        Ok(())
    }
}

fn by_magnitude(z: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j))
}

/// Indices partitioned so the first k are the selected ones (unsorted).
fn partition_top_k(z: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    if k < z.len() {
        idx.select_nth_unstable_by(k - 1, by_magnitude(z));
    }
    idx
}

pub fn hard_threshold(z: &Vector, k: usize) -> Result<ThresholdResult> {
    let n = z.len();
    check_k(n, k)?;
    let zs = z.as_slice();
    let idx = partition_top_k(zs, k);
    let (top, rest) = idx.split_at(k);
    let kth = top.iter().map(|&i| zs[i].abs()).fold(f64::INFINITY, f64::min);
    let next = rest.iter().map(|&i| zs[i].abs()).fold(f64::NEG_INFINITY, f64::max);
    let tie = !rest.is_empty() && kth == next;

    let selected = SupportSet::from_unsorted(top.to_vec());
    let vector = selected.restrict(z);
    let support = SupportSet::of_vector(&vector);
    Ok(ThresholdResult {
        vector,
        support,
        selected,
        tie,
    })
}

/// `sigma_k(z)_1`: the sum of the `n - k` smallest magnitudes.
pub fn best_k_term_error(z: &Vector, k: usize) -> Result<f64> {
    let n = z.len();
    check_k(n, k)?;
    let zs = z.as_slice();
    let idx = partition_top_k(zs, k);
    let mut kept = vec![false; n];
    for &i in &idx[..k] {
        kept[i] = true;
    }
    // summed in index order so it agrees bitwise with ||z - H_k(z)||_1
    Ok(zs
        .iter()
        .zip(&kept)
        .filter(|(_, keep)| !**keep)
        .map(|(v, _)| v.abs())
        .sum())
}

/// Optimal value of `min { |z|^T (e - w) : e^T w = k, 0 <= w <= e }`.
///
/// Every extreme point of the capped simplex is a k-indicator, and the best
/// indicator keeps the k largest magnitudes, so the optimum is `sigma_k(z)_1`.
pub fn lp_relaxation_value(z: &Vector, k: usize) -> Result<f64> {
    best_k_term_error(z, k)
}

/// `|z|^T (e - w)` for an arbitrary weight vector.
pub fn indicator_objective(z: &Vector, w: &Vector) -> f64 {
    z.iter().zip(w.iter()).map(|(v, wi)| v.abs() * (1.0 - wi)).sum()
}

/// Every k-indicator whose kept entries are k largest magnitudes of `z`.
///
/// Visits all `C(n, k)` subsets in lexicographic order; refuses when that
/// count exceeds `guard`.
pub fn enumerate_optimal_indicators(
    z: &Vector,
    k: usize,
    guard: u128,
) -> Result<Vec<IndicatorVector>> {
    let n = z.len();
    check_k(n, k)?;
    check_guard(n, k, guard, "the k largest magnitudes can be read off hard_threshold")?;
    let mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let mut out = Vec::new();
    for subset in (0..n).combinations(k) {
        let mut inside = vec![false; n];
        for &i in &subset {
            inside[i] = true;
        }
        let min_in = subset.iter().map(|&i| mags[i]).fold(f64::INFINITY, f64::min);
        let max_out = (0..n)
            .filter(|i| !inside[*i])
            .map(|i| mags[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if min_in >= max_out {
            out.push(IndicatorVector {
                ones: SupportSet::new(subset).expect("combinations are increasing"),
                len: n,
            });
        }
    }
    Ok(out)
}
