//! Random test instances.

use super::rng::{Rng, Stream};
use crate::model::{Matrix, SparseSignal, Vector};

/// `m x n` matrix of independent standard normals, drawn in row-major order.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed, Stream::Matrix);
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = rng.normal();
        }
    }
    a
}

/// Scale every nonzero column to unit Euclidean norm.
pub fn normalize_columns(a: &mut Matrix) {
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
}

/// Uniformly random k-subset support with standard normal values.
///
/// The support is the first k positions of a partial Fisher-Yates shuffle of
/// `0..n`; values are drawn afterwards in increasing index order, redrawing
/// exact zeros.
pub fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> SparseSignal {
    assert!(k >= 1 && k <= n, "sparsity {k} outside 1..={n}");
    let mut rng = Rng::new(seed, Stream::Signal);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below((n - i) as u64) as usize;
        perm.swap(i, j);
    }
    let mut support = perm[..k].to_vec();
    support.sort_unstable();
    let mut x = Vector::zeros(n);
    for &i in &support {
        x[i] = loop {
            let v = rng.normal();
            if v != 0.0 {
                break v;
            }
        };
    }
    SparseSignal::new(x, k).expect("exactly k nonzeros")
}

/// `len` independent standard normals from `stream`.
pub fn gen_gaussian_vector(len: usize, seed: u64, stream: Stream) -> Vector {
    let mut rng = Rng::new(seed, stream);
    Vector::from_fn(len, |_, _| rng.normal())
}
