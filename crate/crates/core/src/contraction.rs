//! Schur complement bookkeeping for the contraction loop.

use std::borrow::Cow;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::pimetric::{MCholeskyFactor, PiCholeskyFactor, PiMetric};
use crate::rate::{RateMatrix, Tolerances};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Outcome of steady-state selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steady {
    Pivot(usize),
    /// Every remaining diagonal is at or below the pivot floor.
    Exhausted,
}

const NONE: usize = usize::MAX;
/// Smallest active block worth storing densely.
const TAIL_MIN: usize = 48;

/// Dense storage of the off-diagonal part of `D` once it has filled in.
/// Column-major over slots; slots of contracted states hold zeros.
#[derive(Debug, Clone)]
struct DenseTail<T> {
    states: Vec<usize>,
    slot: Vec<usize>,
    inv_pi: Vec<T>,
    /// Nonzero off-diagonal entries per column.
    nz: Vec<usize>,
    a: Vec<T>,
    live: usize,
}

impl<T: Scalar> DenseTail<T> {
    fn m(&self) -> usize {
        self.states.len()
    }

    fn column(&self, s: usize) -> &[T] {
        let m = self.m();
        &self.a[s * m..(s + 1) * m]
    }

    fn sparse_column(&self, j: usize) -> Vec<(usize, T)> {
        let s = self.slot[j];
        self.column(s).iter().enumerate().filter(|&(_, &v)| v != T::zero()).map(|(r, &v)| (self.states[r], v)).collect()
    }
}

/// Evolving `(S, T, D)` together with the factors needed to apply `V`.
///
/// `D` lives on the uncontracted states and is stored by column as sorted
/// off-diagonal entries plus a separate diagonal that is always the negated
/// off-diagonal column sum. When the off-diagonal part becomes dense it moves
/// to a dense block.
#[derive(Debug, Clone)]
pub struct ContractionState<T> {
    pi: Vec<T>,
    cols: Vec<Vec<(usize, T)>>,
    nnz: usize,
    tail: Option<DenseTail<T>>,
    diag: Vec<T>,
    row_abs: Vec<T>,
    active: Vec<bool>,
    n_active: usize,
    chol: PiCholeskyFactor<T>,
    mfac: Option<MCholeskyFactor<T>>,
    pivot_floor: T,
    truncation: T,
    dropped_fill: usize,
}

impl<T: Scalar> ContractionState<T> {
    /// Starts with `S = ∅` and `D = K`.
    pub fn new(k: &RateMatrix<T>, tol: &Tolerances) -> Self {
        let n = k.n();
        let pi = k.pi().to_vec();
        let mut cols = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for j in 0..n {
            let off: Vec<(usize, T)> = k.k().col(j).iter().copied().filter(|&(i, v)| i != j && v != T::zero()).collect();
            diag.push(-off.iter().fold(T::zero(), |s, &(_, v)| s + v));
            cols.push(off);
        }
        let mut st = Self {
            chol: PiCholeskyFactor::new(&pi),
            pi,
            nnz: cols.iter().map(Vec::len).sum(),
            cols,
            tail: None,
            diag,
            row_abs: vec![T::zero(); n],
            active: vec![true; n],
            n_active: n,
            mfac: None,
            pivot_floor: T::of(tol.pivot_floor),
            truncation: T::of(tol.truncation_ratio),
            dropped_fill: 0,
        };
        for j in 0..n {
            st.refresh_row_abs(j);
        }
        st.maybe_densify();
        st
    }

    /// Maintains the factor of `M` as well. `order` must list every state,
    /// starting with the pivots in the order they will be contracted.
    pub fn enable_m_factor(&mut self, order: &[usize]) -> Result<()> {
        if self.k() != 0 {
            return Err(Error::InvalidInput("M factor must be enabled before the first step".into()));
        }
        self.mfac = Some(MCholeskyFactor::new(order, &self.pi)?);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    /// Number of contractions performed.
    pub fn k(&self) -> usize {
        self.chol.len()
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    /// Contracted states in pivot order.
    pub fn contracted(&self) -> &[usize] {
        self.chol.pivot_order()
    }

    /// Uncontracted states in increasing order.
    pub fn uncontracted(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.active[i]).collect()
    }

    pub fn n_uncontracted(&self) -> usize {
        self.n_active
    }

    pub fn is_contracted(&self, i: usize) -> bool {
        !self.active[i]
    }

    pub fn chol(&self) -> &PiCholeskyFactor<T> {
        &self.chol
    }

    pub fn m_factor(&self) -> Option<&MCholeskyFactor<T>> {
        self.mfac.as_ref()
    }

    /// Fill entries discarded by the truncation rule so far.
    pub fn dropped_fill(&self) -> usize {
        self.dropped_fill
    }

    pub fn d_diag(&self, j: usize) -> T {
        self.diag[j]
    }

    /// Nonzero off-diagonal entries of column `j` of `D`, sorted by row.
    pub fn d_column(&self, j: usize) -> Cow<'_, [(usize, T)]> {
        match &self.tail {
            Some(t) if self.active[j] => Cow::Owned(t.sparse_column(j)),
            _ => Cow::Borrowed(&self.cols[j]),
        }
    }

    /// `D_ij` for uncontracted `i`, `j`.
    pub fn d_entry(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diag[j];
        }
        if let Some(t) = &self.tail {
            return if self.active[i] && self.active[j] { t.column(t.slot[j])[t.slot[i]] } else { T::zero() };
        }
        match self.cols[j].binary_search_by_key(&i, |&(r, _)| r) {
            Ok(p) => self.cols[j][p].1,
            Err(_) => T::zero(),
        }
    }

    /// `D x` for `x` indexed by state; entries at contracted states are ignored
    /// and returned as zero.
    pub fn apply_d(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n()];
        for j in 0..self.n() {
            if !self.active[j] || x[j] == T::zero() {
                continue;
            }
            let xj = x[j];
            y[j] = y[j] + self.diag[j] * xj;
            match &self.tail {
                Some(t) => {
                    for (r, &v) in t.column(t.slot[j]).iter().enumerate() {
                        let i = t.states[r];
                        y[i] = y[i] + v * xj;
                    }
                }
                None => {
                    for &(i, v) in &self.cols[j] {
                        y[i] = y[i] + v * xj;
                    }
                }
            }
        }
        y
    }

    /// `D` restricted to the uncontracted states (in increasing order).
    pub fn schur_complement(&self) -> (Vec<usize>, SparseMatrix<T>) {
        let t = self.uncontracted();
        let mut pos = vec![NONE; self.n()];
        for (p, &s) in t.iter().enumerate() {
            pos[s] = p;
        }
        let mut triplets = Vec::new();
        for (q, &j) in t.iter().enumerate() {
            triplets.push((q, q, self.diag[j]));
            for &(i, v) in self.d_column(j).iter() {
                triplets.push((pos[i], q, v));
            }
        }
        let d = SparseMatrix::from_triplets(t.len(), t.len(), &triplets);
        (t, d)
    }

    pub fn schur_dense(&self) -> (Vec<usize>, DenseMatrix<T>) {
        let (t, d) = self.schur_complement();
        (t, DenseMatrix::from_rows(&d.to_dense()))
    }

    /// Metric `Π_T` over [`Self::uncontracted`].
    pub fn metric_t(&self) -> PiMetric<T> {
        PiMetric::new(self.uncontracted().iter().map(|&i| self.pi[i]).collect()).expect("positive pi")
    }

    /// `min(max abs row sum, max abs column sum)` of `D`.
    pub fn gershgorin_rho_d(&self) -> T {
        let mut row = T::zero();
        let mut col = T::zero();
        for j in 0..self.n() {
            if self.active[j] {
                row = row.max(self.row_abs[j]);
                // off-diagonals sum to |D_jj|
                col = col.max(self.diag[j].abs() * T::of(2.0));
            }
        }
        row.min(col)
    }

    /// Uncontracted state with the largest `|D_jj|`, smallest index on ties.
    pub fn select_steady(&self) -> Steady {
        let mut best: Option<(usize, T)> = None;
        for j in 0..self.n() {
            if !self.active[j] {
                continue;
            }
            let m = self.diag[j].abs();
            if best.map_or(true, |(_, b)| m > b) {
                best = Some((j, m));
            }
        }
        match best {
            Some((j, m)) if m > self.pivot_floor => Steady::Pivot(j),
            _ => Steady::Exhausted,
        }
    }

    /// `ln |D_jj|`, the gain in `ln |det K_SS|` from adding `j` to `S`.
    pub fn marginal_logdet_gain(&self, j: usize) -> T {
        self.diag[j].abs().ln()
    }

    /// Contracts state `j`:
    /// `D ← D − D_Tj D_jT / D_jj` on off-diagonals, diagonals re-derived from
    /// column sums, and the factors extended.
    pub fn schur_step(&mut self, j: usize) -> Result<()> {
        if !self.active[j] {
            return Err(Error::InvalidInput(format!("state {j} is already contracted")));
        }
        let djj = self.diag[j];
        if !(djj.abs() > self.pivot_floor) {
            return Err(Error::PivotBreakdown { state: j, value: djj.abs().as_f64() });
        }
        let col_j = match &self.tail {
            Some(t) => t.sparse_column(j),
            None => std::mem::take(&mut self.cols[j]),
        };

        let mut m_broken = false;
        if let Some(m) = self.mfac.as_mut() {
            match m.m_rank_one_update(j, djj, &col_j) {
                Ok(()) => {}
                Err(Error::UpdateBreakdown { .. }) => m_broken = true,
                Err(e) => return Err(e),
            }
        }
        self.chol.append(j, djj, &col_j, self.pivot_floor)?;

        self.active[j] = false;
        self.n_active -= 1;
        self.diag[j] = T::zero();
        self.row_abs[j] = T::zero();

        if self.tail.is_some() {
            self.dense_update(j, djj);
        } else {
            self.sparse_update(j, djj, &col_j);
            for &(l, _) in &col_j {
                self.refresh_row_abs(l);
            }
            self.maybe_densify();
        }

        if m_broken {
            log::warn!("rank-one update of the M factor broke down at step {}; refactorizing", self.k());
            let chol = &self.chol;
            self.mfac.as_mut().unwrap().refactorize(chol)?;
        }
        Ok(())
    }

    fn sparse_update(&mut self, j: usize, djj: T, col_j: &[(usize, T)]) {
        let mag = djj.abs();
        self.nnz -= col_j.len();
        // row j of D over the neighbours, D_jl
        let row_j: Vec<T> = col_j
            .iter()
            .map(|&(l, _)| {
                let c = &self.cols[l];
                match c.binary_search_by_key(&j, |&(r, _)| r) {
                    Ok(p) => c[p].1,
                    Err(_) => T::zero(),
                }
            })
            .collect();
        // fill below this, in the symmetric units D_il / π_i, is dropped
        let fill_floor = self.truncation * mag * self.pi[j];

        for (q, &(l, _)) in col_j.iter().enumerate() {
            let d_jl = row_j[q];
            debug_assert!(d_jl >= T::zero() && djj < T::zero(), "sign pattern violated at ({j}, {l})");
            let coef = d_jl / mag;
            let old = std::mem::take(&mut self.cols[l]);
            let mut merged = Vec::with_capacity(old.len() + col_j.len());
            let (mut a, mut b) = (0, 0);
            while a < old.len() || b < col_j.len() {
                let ra = old.get(a).map_or(NONE, |e| e.0);
                let rb = col_j.get(b).map_or(NONE, |e| e.0);
                if ra < rb {
                    if ra != j {
                        merged.push(old[a]);
                    }
                    a += 1;
                } else if rb < ra {
                    if rb != l {
                        let d_ij = col_j[b].1;
                        debug_assert!(d_ij >= T::zero());
                        if row_j[b] * d_jl >= fill_floor {
                            merged.push((rb, d_ij * coef));
                        } else {
                            self.dropped_fill += 1;
                        }
                    }
                    b += 1;
                } else {
                    merged.push((ra, old[a].1 + col_j[b].1 * coef));
                    a += 1;
                    b += 1;
                }
            }
            self.diag[l] = -merged.iter().fold(T::zero(), |s, &(_, v)| s + v);
            self.nnz = self.nnz + merged.len() - old.len();
            self.cols[l] = merged;
        }
    }

    fn dense_update(&mut self, j: usize, djj: T) {
        let mag = djj.abs();
        let fill_floor = self.truncation * mag * self.pi[j];
        let t = self.tail.as_mut().unwrap();
        let m = t.m();
        let sj = t.slot[j];
        let mut cj: Vec<T> = t.column(sj).to_vec();
        let rj: Vec<T> = (0..m).map(|l| t.a[sj + l * m]).collect();
        t.live -= 1;
        for l in 0..m {
            let d_jl = rj[l];
            if d_jl == T::zero() || l == sj {
                continue;
            }
            let coef = d_jl / mag;
            let col = &mut t.a[l * m..(l + 1) * m];
            col[sj] = T::zero();
            t.nz[l] -= 1;
            let saved = std::mem::replace(&mut cj[l], T::zero());
            let (s, w) = if t.nz[l] + 1 == t.live {
                // no zero entries left, so no fill can arise
                axpy_sums(col, &cj, coef, &t.inv_pi)
            } else {
                // new fill (i, l) survives when D_ji D_jl >= fill_floor
                let keep_from = fill_floor / d_jl;
                let mut nz = 0;
                for ((v, &c), &r) in col.iter_mut().zip(&cj).zip(&rj) {
                    if c != T::zero() {
                        if *v != T::zero() || r >= keep_from {
                            *v = *v + c * coef;
                        } else {
                            self.dropped_fill += 1;
                        }
                    }
                    nz += usize::from(*v != T::zero());
                }
                t.nz[l] = nz;
                sum_and_weighted(col, &t.inv_pi)
            };
            cj[l] = saved;
            let state = t.states[l];
            self.diag[state] = -s;
            self.row_abs[state] = s + self.pi[state] * w;
        }
        for v in &mut t.a[sj * m..(sj + 1) * m] {
            *v = T::zero();
        }
        t.nz[sj] = 0;
        if t.live >= TAIL_MIN && 4 * t.live <= 3 * m {
            self.build_tail();
        }
    }

    fn maybe_densify(&mut self) {
        let m = self.n_active;
        if m >= TAIL_MIN && 3 * self.nnz >= m * (m - 1) {
            self.build_tail();
        }
    }

    /// Moves the active block to dense storage, or repacks an existing one.
    fn build_tail(&mut self) {
        let states = self.uncontracted();
        let m = states.len();
        let mut slot = vec![NONE; self.n()];
        for (s, &i) in states.iter().enumerate() {
            slot[i] = s;
        }
        let mut a = vec![T::zero(); m * m];
        match self.tail.take() {
            Some(old) => {
                for (c, &j) in states.iter().enumerate() {
                    let src = old.column(old.slot[j]);
                    for (r, &i) in states.iter().enumerate() {
                        a[c * m + r] = src[old.slot[i]];
                    }
                }
            }
            None => {
                for (c, &j) in states.iter().enumerate() {
                    for &(i, v) in &std::mem::take(&mut self.cols[j]) {
                        a[c * m + slot[i]] = v;
                    }
                }
                self.nnz = 0;
            }
        }
        let inv_pi = states.iter().map(|&i| T::one() / self.pi[i]).collect();
        let nz = a.chunks(m.max(1)).map(|c| c.iter().filter(|&&v| v != T::zero()).count()).collect();
        self.tail = Some(DenseTail { states, slot, inv_pi, nz, a, live: m });
    }

    /// `Σ_l |D_il| = |D_ii| + π_i Σ_l D_li / π_l` by detailed balance, so the
    /// row sum is read off column `i`.
    fn refresh_row_abs(&mut self, i: usize) {
        let s = match &self.tail {
            Some(t) => sum_and_weighted(t.column(t.slot[i]), &t.inv_pi).1,
            None => self.cols[i].iter().fold(T::zero(), |s, &(l, v)| s + v / self.pi[l]),
        };
        self.row_abs[i] = self.diag[i].abs() + self.pi[i] * s;
    }
}

/// `v += coef·c`, returning the new `Σ v_i` and `Σ v_i w_i` from the same pass.
fn axpy_sums<T: Scalar>(v: &mut [T], c: &[T], coef: T, w: &[T]) -> (T, T) {
    let mut s = [T::zero(); 4];
    let mut ws = [T::zero(); 4];
    let mut vc = v.chunks_exact_mut(4);
    let mut cc = c.chunks_exact(4);
    let mut wc = w.chunks_exact(4);
    for ((a, b), x) in (&mut vc).zip(&mut cc).zip(&mut wc) {
        for k in 0..4 {
            let nv = a[k] + b[k] * coef;
            a[k] = nv;
            s[k] = s[k] + nv;
            ws[k] = ws[k] + nv * x[k];
        }
    }
    let mut s0 = (s[0] + s[1]) + (s[2] + s[3]);
    let mut w0 = (ws[0] + ws[1]) + (ws[2] + ws[3]);
    for ((a, &b), &x) in vc.into_remainder().iter_mut().zip(cc.remainder()).zip(wc.remainder()) {
        *a = *a + b * coef;
        s0 = s0 + *a;
        w0 = w0 + *a * x;
    }
    (s0, w0)
}

/// `(Σ v_i, Σ v_i w_i)` with independent partial sums so the loop vectorizes.
fn sum_and_weighted<T: Scalar>(v: &[T], w: &[T]) -> (T, T) {
    let mut s = [T::zero(); 4];
    let mut ws = [T::zero(); 4];
    let vc = v.chunks_exact(4);
    let wc = w.chunks_exact(4);
    let (vr, wr) = (vc.remainder(), wc.remainder());
    for (a, b) in vc.zip(wc) {
        for k in 0..4 {
            s[k] = s[k] + a[k];
            ws[k] = ws[k] + a[k] * b[k];
        }
    }
    let mut s0 = (s[0] + s[1]) + (s[2] + s[3]);
    let mut w0 = (ws[0] + ws[1]) + (ws[2] + ws[3]);
    for (&a, &b) in vr.iter().zip(wr) {
        s0 = s0 + a;
        w0 = w0 + a * b;
    }
    (s0, w0)
}
