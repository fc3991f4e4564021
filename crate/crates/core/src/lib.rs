//! Sparse recovery by optimal k-thresholding.
//!
//! The solvers recover a k-sparse `x` from `y = A x + noise`. Besides the
//! classic iterative hard thresholding (IHT) and hard thresholding pursuit
//! (HTP), the crate implements optimal k-thresholding (OT, OTP), which picks
//! the k entries of the gradient point that best fit `y`, and its convex
//! relaxation (ROT, ROTP, ROTP2, ROTP3). Indices are 0-based throughout.

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod experiments;
pub mod model;
pub mod subsolvers;
pub mod thresholding;

pub use algorithms::{run, AlgorithmConfig, IterateRecord, IterateTrace, TerminationReason, Variant};
pub use error::{Error, Result};
pub use model::{Matrix, NoiseModel, ProblemInstance, SparseSignal, SupportSet, Vector};
pub use subsolvers::QpSettings;
