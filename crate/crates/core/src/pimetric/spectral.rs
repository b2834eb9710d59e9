use log::debug;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::pimetric::{ForwardSweep, PiCholeskyFactor, PiMetric};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// `min(max abs row sum, max abs column sum)`, an upper bound on `ρ(A)`.
pub fn gershgorin_rho<T: Scalar>(a: &SparseMatrix<T>) -> T {
    let mut rows = vec![T::zero(); a.n_rows()];
    let mut col_max = T::zero();
    for j in 0..a.n_cols() {
        let mut s = T::zero();
        for &(i, v) in a.col(j) {
            s = s + v.abs();
            rows[i] = rows[i] + v.abs();
        }
        col_max = col_max.max(s);
    }
    let row_max = rows.into_iter().fold(T::zero(), T::max);
    row_max.min(col_max)
}

pub fn gershgorin_rho_dense<T: Scalar>(a: &DenseMatrix<T>) -> T {
    let row_max = (0..a.n_rows()).map(|i| a.row(i).iter().fold(T::zero(), |s, v| s + v.abs())).fold(T::zero(), T::max);
    let col_max = (0..a.n_cols())
        .map(|j| (0..a.n_rows()).fold(T::zero(), |s, i| s + a[(i, j)].abs()))
        .fold(T::zero(), T::max);
    row_max.min(col_max)
}

/// Gershgorin-type bound `ρ̂(K_SS⁻¹) ≥ ρ(K_SS⁻¹)`, i.e. `1 / σ̂(K_SS)`.
///
/// `K_SS⁻¹` is entrywise nonpositive, so its absolute row and column sums are
/// the components of `K_SS⁻¹ 1` and `1ᵀ K_SS⁻¹`, one solve each.
pub fn gershgorin_sigma_inv<T: Scalar>(c: &PiCholeskyFactor<T>) -> T {
    if c.is_empty() {
        return T::zero();
    }
    let mut ones = vec![T::zero(); c.n()];
    for &j in c.pivot_order() {
        ones[j] = T::one();
    }
    let max_abs = |x: Vec<T>| c.pivot_order().iter().fold(T::zero(), |m, &j| m.max(x[j].abs()));
    let rows = max_abs(c.solve_kss(&ones));
    let cols = max_abs(c.solve_kss_transpose(&ones));
    rows.min(cols)
}

/// [`gershgorin_sigma_inv`] along a growing factor. The forward halves of
/// both solves are carried incrementally and the backward halves share one
/// pass over the columns.
#[derive(Debug, Clone)]
pub(crate) struct SigmaSweep<T> {
    rows: ForwardSweep<T>,
    cols: ForwardSweep<T>,
}

impl<T: Scalar> SigmaSweep<T> {
    pub(crate) fn new(pi: &[T]) -> Self {
        let neg_ones = vec![-T::one(); pi.len()];
        let neg_pi: Vec<T> = pi.iter().map(|&v| -v).collect();
        Self { rows: ForwardSweep::new(&neg_ones), cols: ForwardSweep::new(&neg_pi) }
    }

    pub(crate) fn value(&mut self, c: &PiCholeskyFactor<T>) -> T {
        if c.is_empty() {
            return T::zero();
        }
        self.rows.advance(c);
        self.cols.advance(c);
        let mut a = self.rows.raw().to_vec();
        let mut b = self.cols.raw().to_vec();
        for i in 0..c.n() {
            if !c.is_contracted(i) {
                a[i] = T::zero();
                b[i] = T::zero();
            }
        }
        c.backward_pair(&mut a, &mut b, c.len());
        let pi = c.pi();
        let (mut rows, mut cols) = (T::zero(), T::zero());
        for &j in c.pivot_order() {
            rows = rows.max((a[j] * pi[j]).abs());
            cols = cols.max(b[j].abs());
        }
        rows.min(cols)
    }
}

/// Stopping rule for [`spectral_radius`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 5000 }
    }
}

/// Largest `|λ|` of an operator that is self-adjoint in the metric `m`.
///
/// Runs Lanczos with full reorthogonalization on `Π^{-1/2} A Π^{1/2}`. The
/// start vector is a fixed non-constant sequence: the all-ones direction is
/// the null vector of a rate matrix with uniform `π`, so it cannot be used.
pub fn spectral_radius<T: Scalar>(
    mut matvec: impl FnMut(&[T]) -> Vec<T>,
    m: &PiMetric<T>,
    opts: &LanczosOptions,
) -> Result<T> {
    let dim = m.dim();
    if dim == 0 {
        return Ok(T::zero());
    }
    let sqrt_pi: Vec<T> = m.pi().iter().map(|p| p.sqrt()).collect();
    let mut apply = |y: &[T]| -> Vec<T> {
        let x: Vec<T> = y.iter().zip(&sqrt_pi).map(|(&a, &s)| a * s).collect();
        matvec(&x).into_iter().zip(&sqrt_pi).map(|(a, &s)| a / s).collect()
    };
    let tol = T::of(opts.tol);
    let eps = T::eps();

    let mut q: Vec<T> = (0..dim).map(|i| T::one() + T::of(0.5) * T::of((1.0 + i as f64 * 0.618_033_988_749_895).sin())).collect();
    let nrm = norm(&q);
    q.iter_mut().for_each(|v| *v = *v / nrm);

    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut scale = T::zero();
    for iter in 0..opts.max_iter {
        let mut w = apply(&q);
        let a = dot(&q, &w);
        axpy(&mut w, -a, &q);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(&mut w, -b, prev);
        }
        basis.push(q);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(&mut w, -c, v);
            }
        }
        alpha.push(a);
        let b = norm(&w);

        let (lo, hi) = extreme_eigenvalues(&alpha, &beta);
        let theta = if lo.abs() >= hi.abs() { lo } else { hi };
        scale = scale.max(theta.abs()).max(a.abs());
        let steps = iter + 1;
        if b <= eps * scale || steps == dim {
            debug!("lanczos: invariant subspace after {steps} steps");
            return Ok(theta.abs());
        }
        let resid = b * last_eigvec_component(&alpha, &beta, theta);
        if resid <= tol * theta.abs() {
            debug!("lanczos: converged after {steps} steps");
            return Ok(theta.abs());
        }
        beta.push(b);
        q = w.into_iter().map(|v| v / b).collect();
    }
    Err(Error::NoConvergence { iterations: opts.max_iter })
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(a, b)` below `x`.
fn sturm_count<T: Scalar>(a: &[T], b: &[T], x: T) -> usize {
    let tiny = T::min_positive_value();
    let mut count = 0;
    let mut d = T::one();
    for i in 0..a.len() {
        let off = if i == 0 { T::zero() } else { b[i - 1] * b[i - 1] / d };
        d = a[i] - x - off;
        if d == T::zero() {
            d = -tiny;
        }
        if d < T::zero() {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalues of the tridiagonal by bisection.
fn extreme_eigenvalues<T: Scalar>(a: &[T], b: &[T]) -> (T, T) {
    let m = a.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..m {
        let r = (if i > 0 { b[i - 1].abs() } else { T::zero() }) + (if i + 1 < m { b[i].abs() } else { T::zero() });
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let pad = (hi - lo).abs().max(hi.abs().max(lo.abs())) * T::eps() + T::min_positive_value();
    lo = lo - pad;
    hi = hi + pad;
    let find = |k: usize| {
        // smallest x with at least k eigenvalues below it
        let (mut l, mut h) = (lo, hi);
        for _ in 0..256 {
            let mid = (l + h) * T::of(0.5);
            if mid <= l || mid >= h {
                break;
            }
            if sturm_count(a, b, mid) >= k {
                h = mid;
            } else {
                l = mid;
            }
        }
        (l + h) * T::of(0.5)
    };
    (find(1), find(m))
}

/// `|s_m|` of the unit eigenvector `s` of the tridiagonal for eigenvalue
/// `theta`, by two steps of inverse iteration.
fn last_eigvec_component<T: Scalar>(a: &[T], b: &[T], theta: T) -> T {
    let m = a.len();
    if m == 1 {
        return T::one();
    }
    let scale = a.iter().chain(b).fold(theta.abs(), |s, v| s.max(v.abs())).max(T::min_positive_value());
    let shift = theta + scale * T::eps() * T::of(4.0);
    let mut x = vec![T::one(); m];
    for _ in 0..3 {
        x = tridiagonal_solve(a, b, shift, &x, scale * T::eps());
        let nrm = norm(&x);
        if !(nrm > T::zero()) || !nrm.is_finite() {
            return T::one();
        }
        x.iter_mut().for_each(|v| *v = *v / nrm);
    }
    x[m - 1].abs()
}

/// Solves `(tridiag(b, a, b) − shift I) x = rhs` by Gaussian elimination with
/// partial pivoting. Zero pivots are replaced by `floor`.
fn tridiagonal_solve<T: Scalar>(a: &[T], b: &[T], shift: T, rhs: &[T], floor: T) -> Vec<T> {
    let n = a.len();
    let mut d: Vec<T> = a.iter().map(|&v| v - shift).collect();
    let mut dl: Vec<T> = b.to_vec();
    let mut du: Vec<T> = b.to_vec();
    let mut x = rhs.to_vec();
    let guard = |v: T| if v == T::zero() { floor.max(T::min_positive_value()) } else { v };
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let piv = guard(d[i]);
            d[i] = piv;
            let fact = dl[i] / piv;
            d[i + 1] = d[i + 1] - fact * du[i];
            x[i + 1] = x[i + 1] - fact * x[i];
            dl[i] = T::zero();
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            }
            du[i] = temp;
            let tb = x[i];
            x[i] = x[i + 1];
            x[i + 1] = tb - fact * x[i + 1];
        }
    }
    x[n - 1] = x[n - 1] / guard(d[n - 1]);
    if n > 1 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / guard(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / guard(d[i]);
    }
    x
}
