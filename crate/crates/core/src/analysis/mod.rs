//! Exactness oracles and error analysis.

mod bounds;
mod eigen;
mod optimal_time;
mod original;

pub use bounds::{
    error_bound, evaluate_record, exact_spectra, expected_error_bound, min_terms, record_inputs, BoundInputs,
    ErrorRecord, RecordInput, PRECISION_FLOOR,
};
pub use eigen::{dense_eigendecompose, exact_solution, Eigenbasis, ExactOracle, Precision, DENSE_LIMIT};
pub use optimal_time::{crossing_lambda, f_objective, optimal_time};
pub use original::{original_rcmc, OriginalOptions, OriginalStep, OriginalTrajectory, ORIGINAL_LIMIT};

use crate::pimetric::PiMetric;
use crate::scalar::Scalar;

/// `‖q − x‖_π / p_norm`, where `p_norm` is `‖p‖_π` of the run's initial vector.
pub fn pi_error<T: Scalar>(q: &[T], x: &[T], m: &PiMetric<T>, p_norm: T) -> T {
    let d: Vec<T> = q.iter().zip(x).map(|(&a, &b)| a - b).collect();
    m.norm(&d) / p_norm
}

/// `‖q − x‖_∞`.
pub fn linf_error<T: Scalar>(q: &[T], x: &[T]) -> T {
    q.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
}

