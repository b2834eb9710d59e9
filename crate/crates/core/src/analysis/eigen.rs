use log::warn;

use crate::dense::{symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::pimetric::PiMetric;
use crate::rate::RateMatrix;
use crate::scalar::{compensated_sum, Scalar};

/// Default size limit for the dense oracles.
pub const DENSE_LIMIT: usize = 512;

/// π-orthonormal eigenpairs of `K`, eigenvalues sorted `0 = λ_1 ≥ … ≥ λ_n`.
#[derive(Debug, Clone)]
pub struct Eigenbasis<T> {
    pub lambdas: Vec<T>,
    /// Eigenvectors `u_k` as columns.
    pub u: DenseMatrix<T>,
    pub pi: Vec<T>,
    /// Significant decimal digits of the arithmetic used.
    pub precision: u32,
}

/// Eigendecomposition of `K` through the symmetric `B = Π^{-1/2} K Π^{1/2}`
/// and `U = Π^{1/2} V`.
///
/// Positive eigenvalues can only come from round-off; they are set to zero.
/// For a connected system `u_1` is set to `π` exactly.
pub fn dense_eigendecompose<T: Scalar>(k: &RateMatrix<T>, limit: usize) -> Result<Eigenbasis<T>> {
    let n = k.n();
    if n > limit {
        return Err(Error::DenseLimitExceeded { n, limit });
    }
    let pi = k.pi();
    let sq: Vec<T> = pi.iter().map(|p| p.sqrt()).collect();
    let mut b = DenseMatrix::zeros(n, n);
    for (i, j, v) in k.k().iter() {
        b[(i, j)] = v * sq[j] / sq[i];
    }
    let (mut lambdas, v) = symmetric_eigen(&b, 100);
    let scale = lambdas.iter().fold(T::zero(), |m, l| m.max(l.abs()));
    // entries come from f64 data, so round-off is at least f64-sized
    let eps = T::eps().max(T::of(f64::EPSILON));
    let tol = scale * eps * T::of(64.0 * n.max(1) as f64);
    for l in lambdas.iter_mut() {
        if *l > T::zero() {
            if *l > tol {
                warn!("eigenvalue {l:e} of K is positive beyond round-off; clamped to 0");
            }
            *l = T::zero();
        }
    }
    let mut u = DenseMatrix::from_fn(n, n, |i, c| sq[i] * v[(i, c)]);
    if n > 0 {
        if k.components().len() == 1 {
            lambdas[0] = T::zero();
            for i in 0..n {
                u[(i, 0)] = pi[i];
            }
        } else if compensated_sum(u.column(0)) < T::zero() {
            for i in 0..n {
                u[(i, 0)] = -u[(i, 0)];
            }
        }
    }
    Ok(Eigenbasis { lambdas, u, pi: pi.to_vec(), precision: T::DIGITS })
}

/// `e^{tλ}` with `t = ∞` mapped to the limit (1 at `λ = 0`, else 0).
pub(crate) fn exp_t_lambda<T: Scalar>(t: T, lambda: T) -> T {
    if t.is_infinite() {
        if lambda == T::zero() {
            T::one()
        } else {
            T::zero()
        }
    } else {
        (t * lambda).exp()
    }
}

impl<T: Scalar> Eigenbasis<T> {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn metric(&self) -> PiMetric<T> {
        PiMetric::new(self.pi.clone()).expect("positive pi")
    }

    /// `⟨u_k, p⟩_π` for every `k`.
    pub fn coefficients(&self, p: &[T]) -> Vec<T> {
        let n = self.n();
        (0..n)
            .map(|c| compensated_sum((0..n).map(|i| self.u[(i, c)] * p[i] / self.pi[i])))
            .collect()
    }

    /// `e^{tK} p = Σ_k e^{tλ_k} ⟨u_k, p⟩_π u_k`.
    pub fn exact_solution(&self, p: &[T], t: T) -> Vec<T> {
        let n = self.n();
        let w: Vec<T> = self.coefficients(p).into_iter().zip(&self.lambdas).map(|(c, &l)| c * exp_t_lambda(t, l)).collect();
        (0..n).map(|i| compensated_sum((0..n).map(|c| w[c] * self.u[(i, c)]))).collect()
    }
}

/// Free-function form of [`Eigenbasis::exact_solution`].
pub fn exact_solution<T: Scalar>(eb: &Eigenbasis<T>, p: &[T], t: T) -> Vec<T> {
    eb.exact_solution(p, t)
}

/// Arithmetic used by the exactness oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
    /// Double-double, about 31 significant digits.
    DoubleDouble,
}

impl Precision {
    pub fn from_digits(digits: u32) -> Result<Self> {
        if digits <= f64::DIGITS {
            Ok(Precision::Double)
        } else if digits <= twofloat::TwoFloat::DIGITS {
            Ok(Precision::DoubleDouble)
        } else {
            Err(Error::PrecisionUnavailable { digits, max: twofloat::TwoFloat::DIGITS })
        }
    }
}

/// Exact propagator evaluated in the requested precision, with `f64` in and out.
#[derive(Debug, Clone)]
pub enum ExactOracle {
    Double(Eigenbasis<f64>),
    DoubleDouble(Eigenbasis<twofloat::TwoFloat>),
}

impl ExactOracle {
    pub fn new(k: &RateMatrix<f64>, precision: Precision, limit: usize) -> Result<Self> {
        Ok(match precision {
            Precision::Double => ExactOracle::Double(dense_eigendecompose(k, limit)?),
            Precision::DoubleDouble => {
                let kk = k.cast::<twofloat::TwoFloat>();
                ExactOracle::DoubleDouble(dense_eigendecompose(&kk, limit)?)
            }
        })
    }

    pub fn exact_solution(&self, p: &[f64], t: f64) -> Vec<f64> {
        match self {
            ExactOracle::Double(eb) => eb.exact_solution(p, t),
            ExactOracle::DoubleDouble(eb) => {
                let pp: Vec<_> = p.iter().map(|&v| v.cast()).collect();
                eb.exact_solution(&pp, t.cast()).into_iter().map(|v| v.as_f64()).collect()
            }
        }
    }

    /// Eigenbasis rounded to `f64` for the bound formulas.
    pub fn basis_f64(&self) -> Eigenbasis<f64> {
        match self {
            ExactOracle::Double(eb) => eb.clone(),
            ExactOracle::DoubleDouble(eb) => Eigenbasis {
                lambdas: eb.lambdas.iter().map(|v| v.as_f64()).collect(),
                u: DenseMatrix::from_fn(eb.n(), eb.n(), |i, j| eb.u[(i, j)].as_f64()),
                pi: eb.pi.iter().map(|v| v.as_f64()).collect(),
                precision: eb.precision,
            },
        }
    }
}
