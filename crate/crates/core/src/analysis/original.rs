//! Contraction in its original super-state form, kept as a dense reference
//! implementation.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rate::RateMatrix;
use crate::scalar::{compensated_sum, Scalar};

/// Largest `n` accepted by [`original_rcmc`].
pub const ORIGINAL_LIMIT: usize = 200;

#[derive(Debug, Clone, Default)]
pub struct OriginalOptions<'a> {
    /// Contract these states in this order instead of selecting by the
    /// largest off-diagonal rate.
    pub forced_pivots: Option<&'a [usize]>,
    /// Keep `Ω^(k)` and `K^(k)` for every step.
    pub keep_matrices: bool,
}

#[derive(Debug, Clone)]
pub struct OriginalStep<T> {
    pub pivot: usize,
    pub t: T,
    pub sigma: T,
    pub q: Vec<T>,
    /// Super-states `T^(k)`, ascending.
    pub remaining: Vec<usize>,
    /// `Ω^(k)`, rows over `remaining`, columns over all states.
    pub omega: Option<DenseMatrix<T>>,
    /// `K^(k)` over `remaining × remaining`.
    pub k_matrix: Option<DenseMatrix<T>>,
}

#[derive(Debug, Clone)]
pub struct OriginalTrajectory<T> {
    pub p: Vec<T>,
    pub steps: Vec<OriginalStep<T>>,
}

/// Runs the super-state contraction: at each step the state `j` owning the
/// largest off-diagonal rate `K_ij` of the current super-state matrix is
/// distributed to the others in proportion `σ K_ij`, with `σ = 1/Σ_{i≠j} K_ij`.
pub fn original_rcmc<T: Scalar>(
    k: &RateMatrix<T>,
    p: &[T],
    t_max: T,
    opts: &OriginalOptions<'_>,
) -> Result<OriginalTrajectory<T>> {
    let n = k.n();
    if n > ORIGINAL_LIMIT {
        return Err(Error::DenseLimitExceeded { n, limit: ORIGINAL_LIMIT });
    }
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!("p has length {}, K is {n}x{n}", p.len())));
    }
    let pi = k.pi();
    let mut kk = DenseMatrix::from_rows(&k.to_dense());
    let mut omega = DenseMatrix::<T>::identity(n);
    let mut pk = p.to_vec();
    let mut in_t = vec![true; n];
    let mut steps = Vec::new();
    let max_steps = opts.forced_pivots.map_or(n.saturating_sub(1), |f| f.len());

    for step in 0..max_steps {
        let (j, kmax) = match opts.forced_pivots {
            Some(f) => {
                let j = f[step];
                if !in_t[j] {
                    return Err(Error::InvalidInput(format!("forced pivot {j} already contracted")));
                }
                let m = (0..n).filter(|&i| i != j && in_t[i]).map(|i| kk[(i, j)]).fold(T::zero(), T::max);
                (j, m)
            }
            None => {
                let mut best: Option<(usize, T)> = None;
                for j in (0..n).filter(|&j| in_t[j]) {
                    for i in (0..n).filter(|&i| i != j && in_t[i]) {
                        if best.map_or(true, |(_, b)| kk[(i, j)] > b) {
                            best = Some((j, kk[(i, j)]));
                        }
                    }
                }
                match best {
                    Some((j, m)) if m > T::zero() => (j, m),
                    _ => break,
                }
            }
        };
        let t = if kmax > T::zero() { T::one() / kmax } else { T::infinity() };
        if t > t_max {
            break;
        }
        in_t[j] = false;
        let rest: Vec<usize> = (0..n).filter(|&i| in_t[i]).collect();
        let colsum = compensated_sum(rest.iter().map(|&i| kk[(i, j)]));
        if !(colsum > T::zero()) {
            return Err(Error::ZeroPivot { state: j });
        }
        let sigma = T::one() / colsum;

        for &i in &rest {
            let w = sigma * kk[(i, j)];
            if w == T::zero() {
                continue;
            }
            for c in 0..n {
                omega[(i, c)] = omega[(i, c)] + w * omega[(j, c)];
            }
            pk[i] = pk[i] + w * pk[j];
        }

        let mut q = vec![T::zero(); n];
        for &i in &rest {
            let denom = compensated_sum((0..n).map(|l| omega[(i, l)] * pi[l]));
            for (c, qc) in q.iter_mut().enumerate() {
                *qc = *qc + pk[i] * omega[(i, c)] * pi[c] / denom;
            }
        }

        let mut next = kk.clone();
        for &c in &rest {
            let den = T::one() + sigma * kk[(j, c)];
            for &i in &rest {
                next[(i, c)] = (kk[(i, c)] + sigma * kk[(i, j)] * kk[(j, c)]) / den;
            }
        }
        kk = next;

        let (om, km) = if opts.keep_matrices {
            (
                Some(DenseMatrix::from_fn(rest.len(), n, |r, c| omega[(rest[r], c)])),
                Some(DenseMatrix::from_fn(rest.len(), rest.len(), |r, c| kk[(rest[r], rest[c])])),
            )
        } else {
            (None, None)
        };
        steps.push(OriginalStep { pivot: j, t, sigma, q, remaining: rest, omega: om, k_matrix: km });
    }
    Ok(OriginalTrajectory { p: p.to_vec(), steps })
}
