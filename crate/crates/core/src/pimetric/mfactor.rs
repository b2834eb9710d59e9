use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::pimetric::PiCholeskyFactor;
use crate::scalar::Scalar;

/// Cholesky factor `G` of `M = I_T + K_TS K_SS⁻² K_ST` in the π-metric,
/// `G G* = M` with `G* = Gᵀ Π_T⁻¹`.
///
/// Rows and columns live in fixed slots given by the full pivot order, so the
/// factor for `T^(k)` is the trailing block starting at slot `k`. In that
/// ordering `M Π_T = G Gᵀ` and each contraction is a plain rank-one update of
/// the trailing block.
#[derive(Debug, Clone)]
pub struct MCholeskyFactor<T> {
    n: usize,
    slot_state: Vec<usize>,
    state_slot: Vec<usize>,
    pi: Vec<T>,
    offset: usize,
    /// Column-major `n × n`, lower triangle used.
    l: Vec<T>,
    refactorizations: usize,
}

impl<T: Scalar> MCholeskyFactor<T> {
    /// `G^(0) = Π^{1/2}` with rows ordered by `order`, a permutation of all
    /// states that starts with the pivot sequence.
    pub fn new(order: &[usize], pi: &[T]) -> Result<Self> {
        let n = pi.len();
        if order.len() != n {
            return Err(Error::DimensionMismatch(format!("order has {} states, system has {n}", order.len())));
        }
        let mut state_slot = vec![usize::MAX; n];
        for (s, &j) in order.iter().enumerate() {
            if j >= n || state_slot[j] != usize::MAX {
                return Err(Error::InvalidInput("M factor order is not a permutation".into()));
            }
            state_slot[j] = s;
        }
        let mut l = vec![T::zero(); n * n];
        for (s, &j) in order.iter().enumerate() {
            l[s * n + s] = pi[j].sqrt();
        }
        Ok(Self { n, slot_state: order.to_vec(), state_slot, pi: pi.to_vec(), offset: 0, l, refactorizations: 0 })
    }

    /// Number of contractions applied.
    pub fn steps(&self) -> usize {
        self.offset
    }

    /// How many times the factor was rebuilt after an update breakdown.
    pub fn refactorizations(&self) -> usize {
        self.refactorizations
    }

    /// Uncontracted states in slot order.
    pub fn states(&self) -> &[usize] {
        &self.slot_state[self.offset..]
    }

    fn at(&self, row: usize, col: usize) -> T {
        self.l[col * self.n + row]
    }

    /// Contracts the next state `j` in the order. `d_col` holds the
    /// off-diagonal entries of column `j` of the current Schur complement.
    ///
    /// On [`Error::UpdateBreakdown`] the factor is left advanced but invalid;
    /// call [`Self::refactorize`] before using it.
    pub fn m_rank_one_update(&mut self, j: usize, d_jj: T, d_col: &[(usize, T)]) -> Result<()> {
        let n = self.n;
        let first = self.offset;
        assert_eq!(self.slot_state.get(first), Some(&j), "state {j} contracted out of order");
        // v = G_T1 − (G_j1 / D_jj) D_Tj
        let mut v: Vec<T> = self.l[first * n..(first + 1) * n].to_vec();
        let ratio = self.at(first, first) / d_jj;
        for &(i, d) in d_col {
            if i != j {
                let s = self.state_slot[i];
                v[s] = v[s] - ratio * d;
            }
        }
        self.offset += 1;
        let step = self.offset;
        for c in self.offset..n {
            let col = &mut self.l[c * n..(c + 1) * n];
            let lcc = col[c];
            let vc = v[c];
            if vc == T::zero() {
                continue;
            }
            let r = lcc.hypot(vc);
            if !(lcc > T::zero()) || !r.is_finite() {
                return Err(Error::UpdateBreakdown { step });
            }
            let cs = r / lcc;
            let sn = vc / lcc;
            col[c] = r;
            for i in c + 1..n {
                let li = (col[i] + sn * v[i]) / cs;
                col[i] = li;
                v[i] = cs * v[i] - sn * li;
            }
        }
        Ok(())
    }

    /// Rebuilds the trailing factor from `M Π_T = Π_T + X Π_S Xᵀ`, assembled
    /// column by column as `Ω Ω* (π_t e_t)`.
    pub fn refactorize(&mut self, chol: &PiCholeskyFactor<T>) -> Result<()> {
        assert_eq!(chol.len(), self.offset, "Cholesky factor and M factor disagree on |S|");
        let states = self.states().to_vec();
        let m = states.len();
        let mut a = DenseMatrix::zeros(m, m);
        let mut e = vec![T::zero(); self.n];
        for (b, &t) in states.iter().enumerate() {
            e[t] = self.pi[t];
            let col = chol.omega_apply(&chol.omega_adjoint_apply(&e));
            e[t] = T::zero();
            for (a_row, &s) in states.iter().enumerate() {
                a[(a_row, b)] = col[s];
            }
        }
        // symmetrize round-off before factoring
        for i in 0..m {
            for j in i + 1..m {
                let avg = (a[(i, j)] + a[(j, i)]) * T::of(0.5);
                a[(i, j)] = avg;
                a[(j, i)] = avg;
            }
        }
        let g = a.cholesky().ok_or(Error::UpdateBreakdown { step: self.offset })?;
        let n = self.n;
        for c in 0..m {
            for r in 0..m {
                self.l[(self.offset + c) * n + self.offset + r] = if r >= c { g[(r, c)] } else { T::zero() };
            }
        }
        self.refactorizations += 1;
        Ok(())
    }

    /// Solves `M z = w` for `w` given at every state (entries at contracted
    /// states are ignored). The result is zero on contracted states.
    pub fn solve(&self, w: &[T]) -> Vec<T> {
        let n = self.n;
        let o = self.offset;
        let mut y: Vec<T> = self.slot_state.iter().map(|&s| w[s]).collect();
        for c in o..n {
            let col = &self.l[c * n..(c + 1) * n];
            let yc = y[c] / col[c];
            y[c] = yc;
            if yc != T::zero() {
                for i in c + 1..n {
                    y[i] = y[i] - col[i] * yc;
                }
            }
        }
        for c in (o..n).rev() {
            let col = &self.l[c * n..(c + 1) * n];
            let mut s = y[c];
            for i in c + 1..n {
                s = s - col[i] * y[i];
            }
            y[c] = s / col[c];
        }
        let mut z = vec![T::zero(); n];
        for c in o..n {
            let s = self.slot_state[c];
            z[s] = y[c] * self.pi[s];
        }
        z
    }

    /// Dense `G G*` over [`Self::states`].
    pub fn product(&self) -> DenseMatrix<T> {
        let o = self.offset;
        let m = self.n - o;
        DenseMatrix::from_fn(m, m, |a, b| {
            let (sa, sb) = (a + o, b + o);
            let mut acc = T::zero();
            for c in o..=sa.min(sb) {
                acc = acc + self.at(sa, c) * self.at(sb, c);
            }
            acc / self.pi[self.slot_state[sb]]
        })
    }
}
