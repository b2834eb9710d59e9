//! Linear algebra in the π-weighted inner product space.

mod cholesky;
mod mfactor;
mod spectral;

pub use cholesky::PiCholeskyFactor;
pub use mfactor::MCholeskyFactor;
pub use spectral::{gershgorin_rho, gershgorin_rho_dense, gershgorin_sigma_inv, spectral_radius, LanczosOptions};
pub(crate) use cholesky::ForwardSweep;
pub(crate) use spectral::SigmaSweep;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Diagonal metric `Π = diag(π)` with `⟨a, b⟩ = aᵀ Π⁻¹ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMetric<T> {
    pi: Vec<T>,
    inv: Vec<T>,
}

impl<T: Scalar> PiMetric<T> {
    pub fn new(pi: Vec<T>) -> Result<Self> {
        if let Some(i) = pi.iter().position(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidInput(format!("metric weight {i} is not positive")));
        }
        let inv = pi.iter().map(|&p| T::one() / p).collect();
        Ok(Self { pi, inv })
    }

    /// Identity metric of dimension `n`.
    pub fn unit(n: usize) -> Self {
        Self { pi: vec![T::one(); n], inv: vec![T::one(); n] }
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn inv(&self) -> &[T] {
        &self.inv
    }

    /// Metric restricted to the listed coordinates, in that order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        Self { pi: idx.iter().map(|&i| self.pi[i]).collect(), inv: idx.iter().map(|&i| self.inv[i]).collect() }
    }

    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        pi_inner(a, b, self)
    }

    pub fn norm(&self, a: &[T]) -> T {
        pi_norm(a, self)
    }
}

/// `Σ a_i b_i / π_i`.
pub fn pi_inner<T: Scalar>(a: &[T], b: &[T], m: &PiMetric<T>) -> T {
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), m.dim());
    compensated_sum(a.iter().zip(b).zip(&m.inv).map(|((&x, &y), &w)| x * y * w))
}

pub fn pi_norm<T: Scalar>(a: &[T], m: &PiMetric<T>) -> T {
    pi_inner(a, a, m).max(T::zero()).sqrt()
}

/// `A* = Π_J Aᵀ Π_I⁻¹` for `A` mapping the `col_metric` space into the
/// `row_metric` space.
pub fn adjoint<T: Scalar>(a: &DenseMatrix<T>, row_metric: &PiMetric<T>, col_metric: &PiMetric<T>) -> DenseMatrix<T> {
    assert_eq!(a.n_rows(), row_metric.dim());
    assert_eq!(a.n_cols(), col_metric.dim());
    DenseMatrix::from_fn(a.n_cols(), a.n_rows(), |j, i| col_metric.pi[j] * a[(i, j)] * row_metric.inv[i])
}
