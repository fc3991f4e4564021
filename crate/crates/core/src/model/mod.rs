//! Problem representation and the dense primitives shared by every algorithm.
//!
//! Matrices are `nalgebra` column-major matrices, so pulling out a column
//! submatrix `A_S` is a sequence of contiguous copies. Index sets are 0-based
//! throughout the crate.

pub mod text;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Measurement matrix `A` (m x n), measurements `y` (length m) and sparsity budget `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: Matrix,
    y: Vector,
    k: usize,
}

impl ProblemInstance {
    pub fn new(a: Matrix, y: Vector, k: usize) -> Result<Self> {
        check_len("measurement vector", a.nrows(), y.len())?;
        if a.ncols() == 0 {
            return Err(Error::invalid("measurement matrix has no columns"));
        }
        if k == 0 || k > a.ncols() {
            return Err(Error::invalid(format!(
                "sparsity budget k = {k} must lie in 1..={}",
                a.ncols()
            )));
        }
        if !a.iter().chain(y.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite entry in A or y"));
        }
        Ok(Self { a, y, k })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of measurements `m`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Signal length `n`.
    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// Same `A` and `y` with a different sparsity budget.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.a.clone(), self.y.clone(), k)
    }

    /// `y - A x`. Panics on a length mismatch; use [`residual_norm`] for a checked call.
    pub fn residual(&self, x: &Vector) -> Vector {
        let mut r = self.y.clone();
        r.gemv(-1.0, &self.a, x, 1.0);
        r
    }

    /// `A^T (y - A x)`, the negative half-gradient of `||y - Ax||^2`.
    pub fn correlation(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&self.residual(x))
    }

    pub(crate) fn check_signal(&self, what: &'static str, x: &Vector) -> Result<()> {
        check_len(what, self.cols(), x.len())
    }

    pub fn into_parts(self) -> (Matrix, Vector, usize) {
        (self.a, self.y, self.k)
    }
}

/// A vector together with the sparsity level it was declared with.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: Vector,
    sparsity: usize,
}

impl SparseSignal {
    pub fn new(values: Vector, sparsity: usize) -> Result<Self> {
        let nnz = values.iter().filter(|v| **v != 0.0).count();
        if nnz > sparsity {
            return Err(Error::invalid(format!(
                "signal has {nnz} nonzeros but was declared {sparsity}-sparse"
            )));
        }
        Ok(Self { values, sparsity })
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn support(&self) -> SupportSet {
        SupportSet::of_vector(&self.values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vector {
        self.values
    }
}

/// Strictly increasing list of 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SupportSet(Vec<usize>);

impl TryFrom<Vec<usize>> for SupportSet {
    type Error = Error;

    fn try_from(indices: Vec<usize>) -> Result<Self> {
        Self::new(indices)
    }
}

impl From<SupportSet> for Vec<usize> {
    fn from(s: SupportSet) -> Self {
        s.0
    }
}

impl SupportSet {
    /// Validates that `indices` is strictly increasing.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("support indices must be strictly increasing"));
        }
        Ok(Self(indices))
    }

    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    /// `supp(x) = { i : x_i != 0 }`.
    pub fn of_vector(x: &Vector) -> Self {
        Self(
            x.iter()
                .enumerate()
                .filter_map(|(i, v)| (*v != 0.0).then_some(i))
                .collect(),
        )
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Indices of `0..n` not in the set.
    pub fn complement(&self, n: usize) -> SupportSet {
        SupportSet((0..n).filter(|i| !self.contains(*i)).collect())
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Self::from_unsorted(all)
    }

    /// 0-1 vector of length `n` with ones on the set.
    pub fn indicator(&self, n: usize) -> Vector {
        let mut w = Vector::zeros(n);
        for &i in &self.0 {
            w[i] = 1.0;
        }
        w
    }

    /// `x_S`: keep entries on the set, zero the rest.
    pub fn restrict(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(x.len());
        for &i in &self.0 {
            out[i] = x[i];
        }
        out
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl std::fmt::Display for SupportSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Scales of the measurement noise `eps * theta` and of the signal perturbation
/// `eps_tilde * theta_tilde` used when generating noisy instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub measurement_scale: f64,
    pub signal_scale: f64,
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel {
        measurement_scale: 0.0,
        signal_scale: 0.0,
    };

    pub fn new(measurement_scale: f64, signal_scale: f64) -> Result<Self> {
        let model = Self {
            measurement_scale,
            signal_scale,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.measurement_scale) && ok(self.signal_scale) {
            Ok(())
        } else {
            Err(Error::invalid("noise scales must be finite and nonnegative"))
        }
    }
}

/// `||y - A x||_2`.
pub fn residual_norm(p: &ProblemInstance, x: &Vector) -> Result<f64> {
    p.check_signal("residual_norm", x)?;
    Ok(p.residual(x).norm())
}

/// Componentwise product `u (x) w`.
pub fn hadamard(u: &Vector, w: &Vector) -> Result<Vector> {
    check_len("hadamard", u.len(), w.len())?;
    Ok(u.component_mul(w))
}

/// Landweber step with unit stepsize: `x + A^T (y - A x)`.
pub fn gradient_step(p: &ProblemInstance, x: &Vector) -> Result<Vector> {
    p.check_signal("gradient_step", x)?;
    Ok(x + p.correlation(x))
}

/// The 2 x 4 instance on which iterative hard thresholding diverges from `x0 = 0`.
pub fn divergence_example() -> ProblemInstance {
    let a = Matrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    let y = Vector::from_vec(vec![1.0, 5.0]);
    ProblemInstance::new(a, y, 1).expect("static instance is valid")
}
