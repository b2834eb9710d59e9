//! Rate constant matrix contraction for stiff linear master equations with
//! detailed balance.

pub mod analysis;
pub mod contraction;
pub mod dense;
pub mod error;
pub mod io;
pub mod pimetric;
pub mod propagator;
pub mod rate;
pub mod scalar;
pub mod simplex;
pub mod sparse;

pub use error::{Error, Result, ValidationReport, Violation};
pub use pimetric::{adjoint, pi_inner, pi_norm, MCholeskyFactor, PiCholeskyFactor, PiMetric};
pub use rate::{stationary_from_balance, validate, Edge, KineticNetwork, RateMatrix, Tolerances};
pub use scalar::Scalar;
pub use sparse::SparseMatrix;
pub use contraction::{ContractionState, Steady};
pub use propagator::{apply_v, omega_apply, reference_time, run, RunOptions, Snapshot, TimeMethod, Trajectory, Variant};
pub use simplex::{project_pi, ProjectionResult};
pub use analysis::{dense_eigendecompose, error_bound, expected_error_bound, optimal_time, original_rcmc, Eigenbasis};
pub use io::{build_canonical, build_from_laplacian, synthesize, SynthParams};

pub type RateMatrixF64 = RateMatrix<f64>;
pub type RateMatrixF32 = RateMatrix<f32>;
pub type RateMatrixDD = RateMatrix<twofloat::TwoFloat>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type EigenbasisF64 = Eigenbasis<f64>;
pub type EigenbasisDD = Eigenbasis<twofloat::TwoFloat>;
pub use twofloat::TwoFloat;
