//! Exact optimal k-thresholding by exhaustive enumeration of k-subsets.

use crate::error::{check_guard, Result};
use crate::model::{Matrix, ProblemInstance, SupportSet, Vector};
use crate::thresholding::IndicatorVector;

pub const BINARY_OT_GUARD: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub indicator: IndicatorVector,
    /// `||y - A (u (x) w)||_2^2` at the returned indicator.
    pub attained_objective: f64,
}

struct Search<'a> {
    b: &'a Matrix,
    k: usize,
    residuals: Vec<Vector>,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn visit(&mut self, start: usize, depth: usize) {
        if depth == self.k {
            let obj = self.residuals[depth].norm_squared();
            if self.best.as_ref().is_none_or(|(b, _)| obj < *b) {
                self.best = Some((obj, self.current.clone()));
            }
            return;
        }
        let n = self.b.ncols();
        for j in start..=n - (self.k - depth) {
            let (head, tail) = self.residuals.split_at_mut(depth + 1);
            tail[0].copy_from(&head[depth]);
            tail[0] -= self.b.column(j);
            self.current.push(j);
            self.visit(j + 1, depth + 1);
            self.current.pop();
        }
    }
}

/// Minimize `||y - A (u (x) w)||_2^2` over all binary `w` with exactly k ones.
///
/// Subsets are visited in lexicographic order and residuals are shared along
/// common prefixes, so each candidate costs one column update. Among equal
/// objectives the lexicographically smallest support wins.
pub fn solve_binary_ot(p: &ProblemInstance, u: &Vector, guard: u128) -> Result<BinarySolution> {
    p.check_signal("solve_binary_ot", u)?;
    let (n, k) = (p.cols(), p.k());
    check_guard(n, k, guard, "use solve_relaxed_ot for problems of this size")?;

    let mut b = p.a().clone();
    for (j, mut col) in b.column_iter_mut().enumerate() {
        col *= u[j];
    }
    let mut search = Search {
        b: &b,
        k,
        residuals: vec![p.y().clone(); k + 1],
        current: Vec::with_capacity(k),
        best: None,
    };
    search.visit(0, 0);
    let (_, best) = search.best.expect("at least one k-subset exists");

    let ones = SupportSet::new(best)?;
    let w = ones.indicator(n);
    let attained_objective = (p.y() - p.a() * u.component_mul(&w)).norm_squared();
    Ok(BinarySolution {
        indicator: IndicatorVector::new(ones, n)?,
        attained_objective,
    })
}
