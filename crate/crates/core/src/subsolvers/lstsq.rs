//! Least squares restricted to a support set.

use crate::error::{Error, Result};
use crate::model::{Matrix, ProblemInstance, SupportSet, Vector};

/// `argmin { ||y - A x||_2 : supp(x) ⊆ S }`, zero outside `S`.
///
/// Solved on the column submatrix `A_S` through a Householder QR with column
/// pivoting. A numerically rank-deficient `A_S` yields the minimum-norm
/// solution. An empty `S` gives the zero vector.
pub fn least_squares_on_support(p: &ProblemInstance, s: &SupportSet) -> Result<Vector> {
    let n = p.cols();
    if s.max_index().is_some_and(|i| i >= n) {
        return Err(Error::invalid(format!("support index out of range for n = {n}")));
    }
    let mut x = Vector::zeros(n);
    if s.is_empty() {
        return Ok(x);
    }
    let a_s = p.a().select_columns(s.indices());
    let coef = min_norm_least_squares(a_s, p.y());
    for (c, &i) in coef.iter().zip(s.indices()) {
        x[i] = *c;
    }
    Ok(x)
}

/// Minimum-norm minimizer of `||a z - b||_2`.
///
/// Pivoted Householder QR `a P = Q R`; the numerical rank `r` is the number of
/// diagonal entries of `R` above `max(m, s) * eps * |R_00|`. When `r < s`, the
/// leading `r x s` block is further factored through a QR of its transpose
/// (a complete orthogonal decomposition) to select the minimum-norm solution.
pub fn min_norm_least_squares(mut a: Matrix, b: &Vector) -> Vector {
    let (m, s) = a.shape();
    assert_eq!(m, b.len(), "right-hand side length");
    let mut rhs = b.clone();
    let mut perm: Vec<usize> = (0..s).collect();
    let steps = m.min(s);

    for i in 0..steps {
        let pivot = (i..s)
            .map(|j| (j, a.view((i, j), (m - i, 1)).norm_squared()))
            .fold((i, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best })
            .0;
        if pivot != i {
            a.swap_columns(i, pivot);
            perm.swap(i, pivot);
        }
        householder_step(&mut a, &mut rhs, i);
    }

    let r00 = if steps > 0 { a[(0, 0)].abs() } else { 0.0 };
    let threshold = m.max(s) as f64 * f64::EPSILON * r00;
    let rank = (0..steps).take_while(|&i| a[(i, i)].abs() > threshold).count();

    let mut z = Vector::zeros(s);
    if rank == 0 {
        return z;
    }
    let c = rhs.rows(0, rank).into_owned();
    let zp = if rank == s {
        a.view((0, 0), (s, s))
            .into_owned()
            .solve_upper_triangular(&c)
            .expect("nonzero diagonal above rank threshold")
    } else {
        // R1 = [R11 R12] is rank x s with full row rank; min-norm solve of R1 zp = c
        let r1t = a.view((0, 0), (rank, s)).upper_triangle().transpose();
        let qr = r1t.qr();
        let t = qr
            .r()
            .transpose()
            .solve_lower_triangular(&c)
            .expect("R1 has full row rank");
        qr.q() * t
    };
    for (j, &col) in perm.iter().enumerate() {
        z[col] = zp[j];
    }
    z
}

/// Reflect rows `i..` of column `i` onto `e_i`, updating the trailing columns and `rhs`.
fn householder_step(a: &mut Matrix, rhs: &mut Vector, i: usize) {
    let (m, s) = a.shape();
    let mut v: Vector = a.view((i, i), (m - i, 1)).column(0).into_owned();
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    let alpha = if v[0] > 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let vtv = v.norm_squared();
    if vtv == 0.0 {
        return;
    }
    let beta = 2.0 / vtv;
    for j in (i + 1)..s {
        let mut col = a.view_mut((i, j), (m - i, 1));
        let mut col = col.column_mut(0);
        let d = beta * v.dot(&col);
        col.axpy(-d, &v, 1.0);
    }
    {
        let mut tail = rhs.rows_mut(i, m - i);
        let d = beta * v.dot(&tail);
        tail.axpy(-d, &v, 1.0);
    }
    a[(i, i)] = alpha;
    for r in (i + 1)..m {
        a[(r, i)] = 0.0;
    }
}
