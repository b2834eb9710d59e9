//! π-norm projection onto the probability simplex.

use crate::pimetric::PiMetric;
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult<T> {
    pub q: Vec<T>,
    /// Number of strictly positive entries of `q`.
    pub support_size: usize,
    /// Multiplier of the sum constraint: `q_i = max(w_i + π_i μ, 0)`.
    pub mu: T,
}

/// `argmin_{q ∈ Δ_n} ‖q − w‖_π`.
///
/// Indices are sorted by `w_i / π_i` descending (smaller index first on ties)
/// and the support is the longest prefix whose threshold
/// `t_j = w_j + π_j (1 − Σ_{i≤j} w_i) / Σ_{i≤j} π_i` is strictly positive.
/// Inputs already on the simplex up to rounding are returned unchanged, which
/// makes the projection idempotent.
pub fn project_pi<T: Scalar>(w: &[T], m: &PiMetric<T>) -> ProjectionResult<T> {
    let n = w.len();
    assert_eq!(n, m.dim(), "vector and metric dimensions differ");
    if n == 0 {
        return ProjectionResult { q: Vec::new(), support_size: 0, mu: T::zero() };
    }
    let pi = m.pi();
    let total = compensated_sum(w.iter().copied());
    let slack = T::of(4.0 * n as f64) * T::eps();
    if w.iter().all(|&v| v >= T::zero()) && (total - T::one()).abs() <= slack {
        let support_size = w.iter().filter(|&&v| v > T::zero()).count();
        return ProjectionResult { q: w.to_vec(), support_size, mu: T::zero() };
    }

    let ratio: Vec<T> = w.iter().zip(pi).map(|(&v, &p)| v / p).collect();
    let mut order: Vec<(u64, usize)> = ratio.iter().enumerate().map(|(i, r)| (descending_key(r.as_f64()), i)).collect();
    order.sort_unstable();
    // Rounding to f64 is monotone, so keys only merge ratios that differ in a
    // wider scalar type; reorder inside such runs.
    let exact = |a: usize, b: usize| ratio[b].partial_cmp(&ratio[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b));
    for i in 1..n {
        let mut k = i;
        while k > 0 && order[k - 1].0 == order[k].0 && exact(order[k - 1].1, order[k].1).is_gt() {
            order.swap(k - 1, k);
            k -= 1;
        }
    }
    let mut sw = T::zero();
    let mut sp = T::zero();
    let mut ell = 0;
    let (mut sw_ell, mut sp_ell) = (T::zero(), T::one());
    for (idx, &(_, j)) in order.iter().enumerate() {
        sw = sw + w[j];
        sp = sp + pi[j];
        let t = w[j] + pi[j] * (T::one() - sw) / sp;
        if t > T::zero() {
            ell = idx + 1;
            sw_ell = sw;
            sp_ell = sp;
        }
    }
    let mu = (T::one() - sw_ell) / sp_ell;
    let q: Vec<T> = w.iter().zip(pi).map(|(&v, &p)| (v + p * mu).max(T::zero())).collect();
    let support_size = q.iter().filter(|&&v| v > T::zero()).count();
    debug_assert!(support_size <= ell.max(1));
    ProjectionResult { q, support_size, mu }
}

/// Integer key whose ascending order is the descending order of `x`.
/// Both zeros share a key.
fn descending_key(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    let asc = if b >> 63 == 1 { !b } else { b | 1 << 63 };
    !asc
}
