//! Validated rate constant matrices, kinetic networks and tolerances.

use std::collections::{HashSet, VecDeque};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationReport, Violation};
use crate::pimetric::PiMetric;
use crate::scalar::{compensated_sum, Scalar};
use crate::sparse::SparseMatrix;

/// Numeric thresholds shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for axiom checks and iterative solvers.
    pub tol_rel: f64,
    /// Absolute slack added to the column-sum check.
    pub tol_abs: f64,
    /// Pivots with `|D_jj|` at or below this value are treated as zero.
    pub pivot_floor: f64,
    /// Couplings with `K_ij / π_j` below this ratio are dropped.
    pub truncation_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_rel: 1e-10, tol_abs: 0.0, pivot_floor: 1e-300, truncation_ratio: 1e-200 }
    }
}

impl Tolerances {
    pub fn check(&self) -> Result<()> {
        let all = [self.tol_rel, self.tol_abs, self.pivot_floor, self.truncation_ratio];
        if all.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidInput(format!("tolerances must be nonnegative: {self:?}")));
        }
        Ok(())
    }
}

/// Rate constant matrix `K` with its stationary distribution `π`.
///
/// Off-diagonals are nonnegative, every column sums to zero and
/// `K_ij π_j = K_ji π_i`. The stored diagonal is always the negated sum of the
/// column's off-diagonals, never the caller's input.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix<T> {
    k: SparseMatrix<T>,
    pi: Vec<T>,
}

impl<T: Scalar> RateMatrix<T> {
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn k(&self) -> &SparseMatrix<T> {
        &self.k
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn metric(&self) -> PiMetric<T> {
        PiMetric::new(self.pi.clone()).expect("validated pi is positive")
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.k.get(i, j)
    }

    pub fn diag(&self, j: usize) -> T {
        self.k.get(j, j)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        self.k.to_dense()
    }

    /// `max_{i != j} K_ij / π_i`, the largest off-diagonal of `Π⁻¹K`.
    pub fn max_scaled_offdiag(&self) -> T {
        self.k
            .iter()
            .filter(|&(i, j, _)| i != j)
            .fold(T::zero(), |m, (i, _, v)| m.max(v / self.pi[i]))
    }

    /// Re-expresses the matrix in another scalar type without re-validation.
    pub fn cast<U: Scalar>(&self) -> RateMatrix<U> {
        let k = self.k.map(|v| v.cast::<U>());
        let pi: Vec<U> = self.pi.iter().map(|v| v.cast::<U>()).collect();
        RateMatrix { k: with_derived_diagonal(&k), pi }
    }

    /// Connected components of the undirected support graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(&self.k)
    }
}

/// Checks the rate-matrix axioms and returns the validated system.
///
/// All violated axioms are reported together, each with its worst offender.
pub fn validate<T: Scalar>(k: &SparseMatrix<T>, pi: &[T], tol: &Tolerances) -> Result<RateMatrix<T>> {
    tol.check()?;
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!("K is {}x{}", k.n_rows(), k.n_cols())));
    }
    if k.n_rows() != pi.len() {
        return Err(Error::DimensionMismatch(format!("K is {n}x{n} but pi has {} entries", pi.len(), n = k.n_rows())));
    }
    let n = pi.len();
    let tol_rel = T::of(tol.tol_rel);
    let tol_abs = T::of(tol.tol_abs);
    let mut report = ValidationReport::default();

    if let Some((i, j, _)) = k.iter().find(|&(_, _, v)| !v.is_finite()) {
        report.violations.push(Violation::NonFinite { i, j });
        return Err(Error::Validation(report));
    }

    // RCM1
    let worst_neg = k
        .iter()
        .filter(|&(i, j, v)| i != j && v < T::zero())
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    if let Some((i, j, v)) = worst_neg {
        report.violations.push(Violation::NegativeOffDiagonal { i, j, value: v.as_f64() });
    }

    // RCM2
    let mut worst_col: Option<(usize, T, T)> = None;
    for j in 0..n {
        let col = k.col(j);
        let sum = compensated_sum(col.iter().map(|&(_, v)| v));
        let scale = col.iter().fold(T::zero(), |m, &(_, v)| m.max(v.abs()));
        let allowed = tol_abs + tol_rel * scale;
        if sum.abs() > allowed {
            let excess = sum.abs() / allowed.max(T::min_positive_value());
            if worst_col.map_or(true, |(_, r, a)| excess > r.abs() / a.max(T::min_positive_value())) {
                worst_col = Some((j, sum, allowed));
            }
        }
    }
    if let Some((j, residual, allowed)) = worst_col {
        report.violations.push(Violation::ColumnSumViolation { j, residual: residual.as_f64(), allowed: allowed.as_f64() });
    }

    // pi in the simplex interior
    let worst_pi = pi
        .iter()
        .enumerate()
        .filter(|(_, &p)| !(p > T::zero()) || !p.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal));
    if let Some((i, &p)) = worst_pi {
        report.violations.push(Violation::NonPositivePi { i, value: p.as_f64() });
    }
    let pi_sum = compensated_sum(pi.iter().copied());
    if (pi_sum - T::one()).abs() > tol_rel {
        report.violations.push(Violation::PiNotNormalized { sum: pi_sum.as_f64() });
    }

    // RCM3, only meaningful with a usable pi
    if worst_pi.is_none() {
        let mut worst: Option<(usize, usize, T)> = None;
        for (i, j, kij) in k.iter() {
            if i == j {
                continue;
            }
            let a = kij * pi[j];
            let b = k.get(j, i) * pi[i];
            let scale = a.abs().max(b.abs());
            if scale == T::zero() {
                continue;
            }
            let mismatch = (a - b).abs() / scale;
            if mismatch > tol_rel && worst.map_or(true, |(_, _, m)| mismatch > m) {
                worst = Some((i, j, mismatch));
            }
        }
        if let Some((i, j, m)) = worst {
            report.violations.push(Violation::DetailedBalanceViolation { i, j, relative_mismatch: m.as_f64() });
        }
    }

    if !report.is_empty() {
        return Err(Error::Validation(report));
    }
    Ok(RateMatrix { k: with_derived_diagonal(k), pi: pi.to_vec() })
}

/// Copy of `k` whose diagonal is the negated sum of each column's off-diagonals.
pub(crate) fn with_derived_diagonal<T: Scalar>(k: &SparseMatrix<T>) -> SparseMatrix<T> {
    let n = k.n_cols();
    let mut triplets = Vec::with_capacity(k.nnz() + n);
    for j in 0..n {
        let off: Vec<T> = k.col(j).iter().filter(|&&(i, _)| i != j).map(|&(_, v)| v).collect();
        for &(i, v) in k.col(j) {
            if i != j {
                triplets.push((i, j, v));
            }
        }
        let d = compensated_sum(off);
        if d != T::zero() {
            triplets.push((j, j, -d));
        }
    }
    SparseMatrix::from_triplets(k.n_rows(), n, &triplets)
}

fn components_of<T: Scalar>(k: &SparseMatrix<T>) -> Vec<Vec<usize>> {
    let n = k.n_cols();
    let mut adj = vec![Vec::new(); n];
    for (i, j, v) in k.iter() {
        if i != j && v != T::zero() {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Recovers `π` from `K` by propagating `π_i / π_j = K_ij / K_ji` along a
/// breadth-first spanning tree, then checks every remaining edge.
///
/// Ratios are accumulated in log space so that weights spanning hundreds of
/// orders of magnitude stay representable until the final normalization.
pub fn stationary_from_balance<T: Scalar>(k: &SparseMatrix<T>, tol: &Tolerances) -> Result<Vec<T>> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!("K is {}x{}", k.n_rows(), k.n_cols())));
    }
    let n = k.n_cols();
    if n == 0 {
        return Ok(Vec::new());
    }
    if let Some((i, j, v)) = k.iter().find(|&(i, j, v)| i != j && (v < T::zero() || !v.is_finite())) {
        return Err(Error::Validation(ValidationReport {
            violations: vec![Violation::NegativeOffDiagonal { i, j, value: v.as_f64() }],
        }));
    }
    let comps = components_of(k);
    if comps.len() > 1 {
        return Err(Error::DisconnectedGraph { components: comps });
    }

    let mut adj = vec![Vec::new(); n];
    for (i, j, v) in k.iter() {
        if i != j && v > T::zero() {
            adj[j].push(i);
            adj[i].push(j);
        }
    }
    let mut log_pi: Vec<Option<T>> = vec![None; n];
    let mut tree_edges = HashSet::new();
    log_pi[0] = Some(T::zero());
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        let lj = log_pi[j].unwrap();
        for &i in &adj[j] {
            if log_pi[i].is_some() {
                continue;
            }
            let kij = k.get(i, j);
            let kji = k.get(j, i);
            if kij == T::zero() || kji == T::zero() {
                return Err(Error::BalanceInconsistent { i, j, mismatch: f64::INFINITY });
            }
            log_pi[i] = Some(lj + kij.ln() - kji.ln());
            tree_edges.insert((i.min(j), i.max(j)));
            queue.push_back(i);
        }
    }
    let log_pi: Vec<T> = log_pi.into_iter().map(Option::unwrap).collect();

    // every edge must agree with the tree-propagated ratios
    let tol_rel = T::of(tol.tol_rel);
    for (i, j, kij) in k.iter() {
        if i >= j || tree_edges.contains(&(i, j)) {
            continue;
        }
        let kji = k.get(j, i);
        if kij == T::zero() && kji == T::zero() {
            continue;
        }
        if kij == T::zero() || kji == T::zero() {
            return Err(Error::BalanceInconsistent { i, j, mismatch: f64::INFINITY });
        }
        // ln(K_ij π_j) - ln(K_ji π_i) approximates the relative mismatch
        let mismatch = (kij.ln() + log_pi[j] - kji.ln() - log_pi[i]).abs();
        if mismatch > tol_rel {
            return Err(Error::BalanceInconsistent { i, j, mismatch: mismatch.as_f64() });
        }
    }

    Ok(normalize_log_weights(&log_pi))
}

/// `exp(w_i) / Σ exp(w_j)` via log-sum-exp.
pub fn normalize_log_weights<T: Scalar>(log_w: &[T]) -> Vec<T> {
    let max = log_w.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    let total = compensated_sum(log_w.iter().map(|&v| (v - max).exp()));
    let log_z = max + total.ln();
    log_w.iter().map(|&v| (v - log_z).exp()).collect()
}

/// One transition state between two equilibrium states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    /// Transition-state energy in J/mol.
    pub barrier: f64,
}

/// Equilibrium states with free energies and the transition states linking them.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticNetwork {
    /// Identifiers carried into outputs.
    pub state_ids: Vec<String>,
    /// Energies in J/mol.
    pub state_energies: Vec<f64>,
    pub edges: Vec<Edge>,
    /// Temperature in kelvin.
    pub temperature: f64,
    /// Transmission coefficient.
    pub transmission: f64,
}

impl KineticNetwork {
    /// Checks edge references and finiteness. Barriers below an endpoint energy
    /// are accepted with a warning.
    pub fn new(
        state_ids: Vec<String>,
        state_energies: Vec<f64>,
        edges: Vec<Edge>,
        temperature: f64,
        transmission: f64,
    ) -> Result<Self> {
        let n = state_energies.len();
        if state_ids.len() != n {
            return Err(Error::DimensionMismatch(format!("{} ids for {n} states", state_ids.len())));
        }
        if let Some(i) = state_energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidInput(format!("energy of state {i} is not finite")));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidInput(format!("temperature must be positive, got {temperature}")));
        }
        if !(transmission > 0.0) || !transmission.is_finite() {
            return Err(Error::InvalidInput(format!("transmission must be positive, got {transmission}")));
        }
        let mut pairs = HashSet::new();
        for (e, edge) in edges.iter().enumerate() {
            if edge.i >= n || edge.j >= n {
                return Err(Error::InvalidInput(format!("edge {e} references a missing state")));
            }
            if edge.i == edge.j {
                return Err(Error::InvalidInput(format!("edge {e} is a self loop on state {}", edge.i)));
            }
            if !edge.barrier.is_finite() {
                return Err(Error::InvalidInput(format!("edge {e} has a non-finite barrier")));
            }
            if !pairs.insert((edge.i.min(edge.j), edge.i.max(edge.j))) {
                return Err(Error::InvalidInput(format!("duplicate edge between {} and {}", edge.i, edge.j)));
            }
            let floor = state_energies[edge.i].max(state_energies[edge.j]);
            if edge.barrier < floor {
                warn!(
                    "edge {e} ({}-{}) has barrier {} J/mol below its endpoint energy {} J/mol",
                    edge.i, edge.j, edge.barrier, floor
                );
            }
        }
        Ok(Self { state_ids, state_energies, edges, temperature, transmission })
    }

    pub fn n(&self) -> usize {
        self.state_energies.len()
    }
}
