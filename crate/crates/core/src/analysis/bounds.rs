use crate::analysis::eigen::{exp_t_lambda, Eigenbasis};
use crate::analysis::{linf_error, pi_error};
use crate::contraction::ContractionState;
use crate::dense::{symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::propagator::{Spectra, Trajectory, Variant};
use crate::rate::{RateMatrix, Tolerances};
use crate::scalar::{compensated_sum, Scalar};

/// Quantities of the partition `{S, T}` entering the error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs<T> {
    /// `σ(K_SS)`, smallest `|λ|` of `K_SS`.
    pub sigma_kss: T,
    /// `ρ(D)`, largest `|λ|` of the Schur complement.
    pub rho_d: T,
    /// `‖Π⁻¹K‖_{∞,off} = max_{i≠j} K_ij / π_i`.
    pub offmax: T,
}

/// `min(1, α_k, β_k)` for every eigenvalue.
pub fn min_terms<T: Scalar>(eb: &Eigenbasis<T>, b: &BoundInputs<T>, t: T, variant: Variant) -> Vec<T> {
    let two = T::of(2.0);
    eb.lambdas
        .iter()
        .map(|&l| {
            let mag = l.abs();
            let e = exp_t_lambda(t, l);
            let alpha = if mag == T::zero() { T::infinity() } else { b.rho_d / mag + e };
            let head = match variant {
                Variant::TypeA => mag + (two * b.offmax * mag).sqrt(),
                Variant::TypeB => mag,
            };
            let beta = head / b.sigma_kss + T::one() - e;
            T::one().min(alpha).min(beta)
        })
        .collect()
}

/// `min(Σ_k |⟨u_k, p⟩_π| / ‖p‖_π · min(1, α_k, β_k), 1)`.
pub fn error_bound<T: Scalar>(eb: &Eigenbasis<T>, b: &BoundInputs<T>, t: T, p: &[T], variant: Variant) -> T {
    let m = min_terms(eb, b, t, variant);
    let coef = eb.coefficients(p);
    let pn = eb.metric().norm(p);
    let s = compensated_sum(coef.iter().zip(&m).map(|(&c, &mk)| c.abs() / pn * mk));
    s.min(T::one())
}

/// `min(sqrt((1/n) Σ_k min(1, α_k, β_k)²), 1)`, the bound on the error averaged
/// over the vertices of the simplex.
pub fn expected_error_bound<T: Scalar>(eb: &Eigenbasis<T>, b: &BoundInputs<T>, t: T, variant: Variant) -> T {
    let m = min_terms(eb, b, t, variant);
    let n = T::of(m.len().max(1) as f64);
    (compensated_sum(m.iter().map(|&v| v * v)) / n).sqrt().min(T::one())
}

/// Extreme eigenvalue moduli of a matrix self-adjoint in the metric `pi`,
/// by dense symmetrization.
fn dense_extremes<T: Scalar>(a: &DenseMatrix<T>, pi: &[T]) -> (T, T) {
    let n = a.n_rows();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let sq: Vec<T> = pi.iter().map(|p| p.sqrt()).collect();
    let b = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] * sq[j] / sq[i]);
    let (vals, _) = symmetric_eigen(&b, 100);
    let mags = vals.iter().map(|v| v.abs());
    let lo = mags.clone().fold(T::infinity(), T::min);
    let hi = mags.fold(T::zero(), T::max);
    (lo, hi)
}

/// Exact `σ(K_SS)` and `ρ(D)` for the current partition of `st`, from dense
/// eigendecompositions.
pub fn exact_spectra<T: Scalar>(k: &RateMatrix<T>, st: &ContractionState<T>) -> Spectra<T> {
    let s = st.contracted().to_vec();
    let kss = DenseMatrix::from_rows(&k.k().submatrix(&s, &s).to_dense());
    let pi_s: Vec<T> = s.iter().map(|&i| k.pi()[i]).collect();
    let (sigma, _) = dense_extremes(&kss, &pi_s);
    let (t, d) = st.schur_dense();
    let pi_t: Vec<T> = t.iter().map(|&i| k.pi()[i]).collect();
    let (_, rho) = dense_extremes(&d, &pi_t);
    Spectra { sigma_kss: sigma, rho_d: rho }
}

/// One row of an error report.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub k: usize,
    pub t: f64,
    /// `‖q − e^{tK}p‖_π / ‖p‖_π` for the emitted (projected) `q`.
    pub pi_err: f64,
    /// Same for `Vp` before clamping or projection, when available.
    pub pi_err_unprojected: Option<f64>,
    pub linf_err: f64,
    pub bound_a: f64,
    pub bound_b: f64,
    /// Vertex-averaged bound for the run's variant.
    pub expected_bound: f64,
    /// `bound_b` is below the double-precision floor, so the comparison is
    /// not meaningful.
    pub precision_limited: bool,
}

/// Threshold under which bound comparisons are flagged precision-limited.
pub const PRECISION_FLOOR: f64 = 1e-12;

/// Everything needed to evaluate one snapshot, independent of the others.
#[derive(Debug, Clone)]
pub struct RecordInput {
    pub k: usize,
    pub t: f64,
    pub q: Vec<f64>,
    pub unprojected: Option<Vec<f64>>,
    pub spectra: Spectra<f64>,
}

/// Replays the trajectory's pivots to collect exact spectra for every
/// non-initial, non-terminal snapshot.
pub fn record_inputs(k: &RateMatrix<f64>, traj: &Trajectory<f64>, tol: &Tolerances) -> Result<Vec<RecordInput>> {
    let mut st = ContractionState::new(k, tol);
    let mut out = Vec::new();
    for snap in traj.iterates().filter(|s| s.k > 0) {
        let j = snap.pivot.ok_or_else(|| Error::InvalidInput("snapshot without pivot".into()))?;
        st.schur_step(j)?;
        out.push(RecordInput {
            k: snap.k,
            t: snap.t,
            q: snap.q.clone(),
            unprojected: snap.unprojected.clone(),
            spectra: exact_spectra(k, &st),
        });
    }
    Ok(out)
}

/// Error and bounds for one snapshot. `exact` is `e^{tK}p`.
pub fn evaluate_record(
    eb: &Eigenbasis<f64>,
    input: &RecordInput,
    p: &[f64],
    exact: &[f64],
    offmax: f64,
    variant: Variant,
) -> ErrorRecord {
    let m = eb.metric();
    let pn = m.norm(p);
    let b = BoundInputs { sigma_kss: input.spectra.sigma_kss, rho_d: input.spectra.rho_d, offmax };
    let bound_a = error_bound(eb, &b, input.t, p, Variant::TypeA);
    let bound_b = error_bound(eb, &b, input.t, p, Variant::TypeB);
    ErrorRecord {
        k: input.k,
        t: input.t,
        pi_err: pi_error(&input.q, exact, &m, pn),
        pi_err_unprojected: input.unprojected.as_ref().map(|u| pi_error(u, exact, &m, pn)),
        linf_err: linf_error(&input.q, exact),
        bound_a,
        bound_b,
        expected_bound: expected_error_bound(eb, &b, input.t, variant),
        precision_limited: bound_b < PRECISION_FLOOR,
    }
}
