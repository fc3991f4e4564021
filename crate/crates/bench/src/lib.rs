//! Shared fixtures for the benchmarks.

use optk::experiments::{gen_gaussian_matrix, gen_sparse_signal};
use optk::{ProblemInstance, Vector};

/// Noiseless Gaussian instance with its k-sparse ground truth.
pub fn instance(m: usize, n: usize, k: usize, seed: u64) -> (ProblemInstance, Vector) {
    let a = gen_gaussian_matrix(m, n, seed);
    let x = gen_sparse_signal(n, k, seed).into_values();
    let y = &a * &x;
    (ProblemInstance::new(a, y, k).expect("valid sizes"), x)
}
