use crate::error::{Error, Result};
use crate::rate::{normalize_log_weights, validate, KineticNetwork, RateMatrix, Tolerances};
use crate::sparse::SparseMatrix;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.62607015e-34;
/// Molar gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.31446261815324;

/// Rate matrix built from a network, over the states that survive truncation.
#[derive(Debug, Clone)]
pub struct CanonicalSystem {
    pub rates: RateMatrix<f64>,
    /// `state_map[r]` is the network index of row `r`.
    pub state_map: Vec<usize>,
    /// Identifiers of the surviving states, in row order.
    pub state_ids: Vec<String>,
    /// Edges removed by truncation or underflow.
    pub dropped_edges: usize,
}

/// Transition-state theory rates `K_ij = Γ (k_B T / h) exp(−(E_ij − E_j)/RT)`
/// in both directions of every edge, with Boltzmann weights for `π`.
///
/// A pair is dropped when `K_ij / π_i` (equal to `K_ji / π_j`) is below
/// `tol.truncation_ratio`, or when either rate underflows. States left without
/// edges are removed and `π` is renormalized over the rest. Everything is done
/// in the log domain, so energies far beyond `exp` range are fine.
pub fn build_canonical(net: &KineticNetwork, tol: &Tolerances) -> Result<CanonicalSystem> {
    tol.check()?;
    let n = net.n();
    let rt = GAS_CONSTANT * net.temperature;
    let ln_pref = (net.transmission * BOLTZMANN * net.temperature / PLANCK).ln();
    let log_w: Vec<f64> = net.state_energies.iter().map(|e| -e / rt).collect();
    let log_z = {
        let max = log_w.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        max + log_w.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    };
    let ln_ratio = tol.truncation_ratio.ln();

    let mut kept = Vec::new();
    let mut dropped = 0;
    for e in &net.edges {
        let (i, j) = (e.i, e.j);
        let ln_kij = ln_pref - (e.barrier - net.state_energies[j]) / rt;
        let ln_kji = ln_pref - (e.barrier - net.state_energies[i]) / rt;
        // ln(K_ij / π_i) with π_i = exp(log_w_i − log_z)
        let ln_scaled = ln_kij - (log_w[i] - log_z);
        let (kij, kji) = (ln_kij.exp(), ln_kji.exp());
        if ln_scaled < ln_ratio || kij == 0.0 || kji == 0.0 || !kij.is_finite() || !kji.is_finite() {
            dropped += 1;
            continue;
        }
        kept.push((i, j, kij, kji));
    }

    let mut used = vec![false; n];
    for &(i, j, _, _) in &kept {
        used[i] = true;
        used[j] = true;
    }
    if n == 1 {
        used[0] = true;
    }
    let state_map: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
    if state_map.is_empty() {
        return Err(Error::EmptyAfterTruncation);
    }
    let mut row = vec![usize::MAX; n];
    for (r, &i) in state_map.iter().enumerate() {
        row[i] = r;
    }
    let m = state_map.len();
    let sub_log_w: Vec<f64> = state_map.iter().map(|&i| log_w[i]).collect();
    let pi = normalize_log_weights(&sub_log_w);
    if let Some(r) = pi.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::StationaryUnderflow { state: state_map[r] });
    }

    let mut trip = Vec::with_capacity(3 * kept.len() + m);
    let mut diag = vec![0.0; m];
    for &(i, j, kij, kji) in &kept {
        let (a, b) = (row[i], row[j]);
        trip.push((a, b, kij));
        trip.push((b, a, kji));
        diag[b] -= kij;
        diag[a] -= kji;
    }
    for (r, d) in diag.into_iter().enumerate() {
        trip.push((r, r, d));
    }
    let k = SparseMatrix::from_triplets(m, m, &trip);
    let rates = validate(&k, &pi, tol)?;
    Ok(CanonicalSystem {
        rates,
        state_ids: state_map.iter().map(|&i| net.state_ids[i].clone()).collect(),
        state_map,
        dropped_edges: dropped,
    })
}

/// `K = −L Π⁻¹` for a symmetric graph Laplacian `L`.
pub fn build_from_laplacian(l: &SparseMatrix<f64>, pi: &[f64], tol: &Tolerances) -> Result<RateMatrix<f64>> {
    if !l.is_square() || l.n_rows() != pi.len() {
        return Err(Error::DimensionMismatch(format!(
            "L is {}x{} but pi has {} entries",
            l.n_rows(),
            l.n_cols(),
            pi.len()
        )));
    }
    let trip: Vec<(usize, usize, f64)> = l.iter().map(|(i, j, v)| (i, j, -v / pi[j])).collect();
    validate(&SparseMatrix::from_triplets(l.n_rows(), l.n_cols(), &trip), pi, tol)
}
