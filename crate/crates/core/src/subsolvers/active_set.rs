//! Primal active-set method for `min w^T H w - 2 c^T w` over the capped simplex.
//!
//! Every coordinate sits at 0 or 1 except a free set `F`. The budget
//! constraint is eliminated by writing the first free coordinate (the pivot)
//! as `budget - sum(rest)`, so the face problem is an unconstrained least
//! squares in the remaining free coordinates with Hessian
//! `R_ij = H_ij - H_i0 - H_0j + H_00`. Its Cholesky factor is grown and shrunk
//! one column at a time. A step toward the face minimizer that leaves the box
//! stops at the first bound and fixes that coordinate; at a face minimizer the
//! coordinate with the most violated multiplier sign is freed.

use nalgebra::Cholesky;

use crate::model::{Matrix, Vector};

type Factor = Cholesky<f64, nalgebra::Dyn>;

/// Relative pivot below which a column counts as dependent on the free set.
const PIVOT_TOLERANCE: f64 = 1e-10;

struct State<'a> {
    h: &'a Matrix,
    c: &'a Vector,
    k: usize,
    w: Vector,
    at_one: Vec<bool>,
    /// `free[0]` is the pivot; `factor` covers `free[1..]`.
    free: Vec<usize>,
    factor: Option<Factor>,
    /// `H 1_ones`.
    h_ones: Vector,
}

impl State<'_> {
    fn budget(&self) -> f64 {
        (self.k - self.at_one.iter().filter(|&&b| b).count()) as f64
    }

    fn reduced(&self, i: usize, j: usize) -> f64 {
        let p = self.free[0];
        self.h[(i, j)] - self.h[(i, p)] - self.h[(p, j)] + self.h[(p, p)]
    }

    fn release(&mut self, i: usize) {
        if self.at_one[i] {
            self.at_one[i] = false;
            self.h_ones -= self.h.column(i);
        }
    }

    /// Add `i` to the free set; false if its column is dependent.
    fn free_index(&mut self, i: usize) -> bool {
        if self.free.is_empty() {
            self.release(i);
            self.free.push(i);
            return true;
        }
        let f = self.free.len() - 1;
        let rii = self.reduced(i, i);
        if !(rii > 0.0) {
            return false;
        }
        let mut col = Vector::zeros(f + 1);
        for (r, &j) in self.free[1..].iter().enumerate() {
            col[r] = self.reduced(j, i);
        }
        col[f] = rii;
        let grown = match &self.factor {
            None => Cholesky::new(Matrix::from_element(1, 1, rii)),
            Some(fac) => {
                let row = fac
                    .l_dirty()
                    .solve_lower_triangular(&col.rows(0, f).into_owned());
                match row {
                    Some(row) if rii - row.norm_squared() > PIVOT_TOLERANCE * rii => {
                        Some(fac.insert_column(f, col))
                    }
                    _ => None,
                }
            }
        };
        let Some(grown) = grown else { return false };
        self.factor = Some(grown);
        self.release(i);
        self.free.push(i);
        true
    }

    fn refactor(&mut self) -> bool {
        let rest = &self.free[1.min(self.free.len())..];
        if rest.is_empty() {
            self.factor = None;
            return true;
        }
        let r = Matrix::from_fn(rest.len(), rest.len(), |a, b| self.reduced(rest[a], rest[b]));
        self.factor = Cholesky::new(r);
        self.factor.is_some()
    }

    /// Fix the free coordinate at position `pos` to `value` (0 or 1).
    fn fix(&mut self, pos: usize, value: f64) -> bool {
        let i = self.free.remove(pos);
        self.w[i] = value;
        if value == 1.0 {
            self.at_one[i] = true;
            self.h_ones += self.h.column(i);
        }
        if pos == 0 {
            return self.refactor();
        }
        self.factor = match self.factor.take() {
            Some(fac) if self.free.len() > 1 => Some(fac.remove_column(pos - 1)),
            _ => None,
        };
        true
    }

    /// Move toward the face minimizer. Returns `Some(true)` when it was
    /// reached, `Some(false)` after hitting a bound, `None` on breakdown.
    fn face_step(&mut self) -> Option<bool> {
        let Some(&p) = self.free.first() else {
            return Some(true);
        };
        let budget = self.budget();
        let mut z = Vector::zeros(self.free.len());
        z[0] = budget;
        if let Some(fac) = &self.factor {
            let s = |i: usize| self.c[i] - self.h_ones[i] - budget * self.h[(i, p)];
            let rest = &self.free[1..];
            let rhs = Vector::from_fn(rest.len(), |j, _| s(rest[j]) - s(p));
            let v = fac.solve(&rhs);
            z[0] = budget - v.sum();
            z.rows_mut(1, rest.len()).copy_from(&v);
        }
        let mut t = 1.0f64;
        let mut blocking = None;
        for (j, &i) in self.free.iter().enumerate() {
            let (wi, zj) = (self.w[i], z[j]);
            let limit = if zj < 0.0 {
                wi / (wi - zj)
            } else if zj > 1.0 {
                (1.0 - wi) / (zj - wi)
            } else {
                continue;
            };
            if limit < t {
                t = limit;
                blocking = Some((j, if zj < 0.0 { 0.0 } else { 1.0 }));
            }
        }
        for (j, &i) in self.free.iter().enumerate() {
            self.w[i] += t * (z[j] - self.w[i]);
        }
        match blocking {
            Some((pos, value)) => self.fix(pos, value).then_some(false),
            None => Some(true),
        }
    }

    /// Coordinates to free next, if the current face minimizer is not optimal.
    fn most_violated(&self, tol: f64) -> Option<Vec<usize>> {
        let g = self.h * &self.w - self.c;
        let n = self.w.len();
        if self.free.is_empty() {
            // vertex: need min over zeros of g >= max over ones of g
            let lo = (0..n)
                .filter(|&i| !self.at_one[i])
                .min_by(|&a, &b| g[a].total_cmp(&g[b]));
            let hi = (0..n)
                .filter(|&i| self.at_one[i])
                .max_by(|&a, &b| g[a].total_cmp(&g[b]));
            return match (lo, hi) {
                (Some(i), Some(j)) if g[i] < g[j] - tol => Some(vec![j, i]),
                _ => None,
            };
        }
        let nu = -self.free.iter().map(|&i| g[i]).sum::<f64>() / self.free.len() as f64;
        let mut best: Option<(f64, usize)> = None;
        for i in (0..n).filter(|i| !self.free.contains(i)) {
            let v = if self.at_one[i] { g[i] + nu } else { -(g[i] + nu) };
            if v > tol && best.is_none_or(|(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        best.map(|(_, i)| vec![i])
    }
}

/// Run from the vertex `start` (a 0/1 vector with `k` ones). Stops early,
/// returning the current feasible point, when a dependent column blocks
/// progress or `max_steps` is exhausted.
pub(super) fn solve_from_vertex(
    h: &Matrix,
    c: &Vector,
    k: usize,
    start: &Vector,
    max_steps: usize,
) -> Vector {
    let n = start.len();
    let at_one: Vec<bool> = start.iter().map(|&v| v == 1.0).collect();
    let mut h_ones = Vector::zeros(n);
    for (i, _) in at_one.iter().enumerate().filter(|(_, &b)| b) {
        h_ones += h.column(i);
    }
    let mut s = State {
        h,
        c,
        k,
        w: start.clone(),
        at_one,
        free: Vec::new(),
        factor: None,
        h_ones,
    };
    let tol = 1e-12 * (1.0 + c.amax() + h.diagonal().amax());
    for _ in 0..max_steps {
        match s.face_step() {
            None => break,
            Some(false) => continue,
            Some(true) => {}
        }
        let Some(enter) = s.most_violated(tol) else {
            break;
        };
        if !enter.into_iter().all(|i| s.free_index(i)) {
            break;
        }
    }
    s.w
}
