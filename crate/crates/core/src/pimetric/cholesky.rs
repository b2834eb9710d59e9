use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NONE: usize = usize::MAX;

/// Cholesky factor of `−K_SS` in the π-metric: `C_SS C_SS* = −K_SS` with
/// `C* = Cᵀ Π⁻¹`.
///
/// Columns are stored in pivot order. Column `k` keeps its diagonal entry
/// separately and its off-diagonal entries as `(state, value)` pairs over the
/// states that were still uncontracted when it was appended. Because of that,
/// the same storage also holds `C_TS` for the current complement `T`.
#[derive(Debug, Clone)]
pub struct PiCholeskyFactor<T> {
    pi: Vec<T>,
    order: Vec<usize>,
    pos: Vec<usize>,
    diag: Vec<T>,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> PiCholeskyFactor<T> {
    /// Empty factor over states with stationary weights `pi`.
    pub fn new(pi: &[T]) -> Self {
        Self { pi: pi.to_vec(), order: Vec::new(), pos: vec![NONE; pi.len()], diag: Vec::new(), cols: Vec::new() }
    }

    /// Number of states in the full system.
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    /// Number of appended columns, `|S|`.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn pivot_order(&self) -> &[usize] {
        &self.order
    }

    /// Column index of `state`, if contracted.
    pub fn position(&self, state: usize) -> Option<usize> {
        let p = self.pos[state];
        (p != NONE).then_some(p)
    }

    pub fn is_contracted(&self, state: usize) -> bool {
        self.pos[state] != NONE
    }

    /// `(pivot state, diagonal entry, off-diagonal entries)` of column `k`.
    pub fn column(&self, k: usize) -> (usize, T, &[(usize, T)]) {
        (self.order[k], self.diag[k], &self.cols[k])
    }

    /// Appends the column produced by contracting state `j` out of the current
    /// Schur complement `D`. `d_col` holds the off-diagonal entries `D_ij` of
    /// column `j` over the uncontracted states.
    pub fn append(&mut self, j: usize, d_jj: T, d_col: &[(usize, T)], pivot_floor: T) -> Result<()> {
        let mag = d_jj.abs();
        if !(mag > pivot_floor) {
            return Err(Error::PivotBreakdown { state: j, value: mag.as_f64() });
        }
        let pj = self.pi[j];
        let scale = (pj / mag).sqrt();
        let col: Vec<(usize, T)> = d_col
            .iter()
            .filter(|&&(i, v)| i != j && v != T::zero())
            .map(|&(i, v)| {
                debug_assert!(self.pos[i] == NONE, "row {i} already contracted");
                (i, -(scale * v))
            })
            .collect();
        self.push_column(j, (pj * mag).sqrt(), col);
        Ok(())
    }

    pub(crate) fn push_column(&mut self, j: usize, diag: T, off: Vec<(usize, T)>) {
        assert_eq!(self.pos[j], NONE, "state {j} contracted twice");
        self.pos[j] = self.order.len();
        self.order.push(j);
        self.diag.push(diag);
        self.cols.push(off);
    }

    /// In-place forward substitution over columns `from..to`. Afterwards the
    /// entries of `r` at those pivots hold the solution components and the
    /// remaining entries have been eliminated against them.
    pub(crate) fn forward(&self, r: &mut [T], from: usize, to: usize) {
        for k in from..to {
            let j = self.order[k];
            let y = r[j] / self.diag[k];
            r[j] = y;
            if y == T::zero() {
                continue;
            }
            for &(i, c) in &self.cols[k] {
                r[i] = r[i] - c * y;
            }
        }
    }

    /// In-place backward substitution `Cᵀ` over the first `to` columns. Entries
    /// of `a` at uncontracted states are treated as known.
    pub(crate) fn backward(&self, a: &mut [T], to: usize) {
        for k in (0..to).rev() {
            let j = self.order[k];
            let mut s = a[j];
            for &(i, c) in &self.cols[k] {
                s = s - c * a[i];
            }
            a[j] = s / self.diag[k];
        }
    }

    /// [`Self::backward`] on two right-hand sides in one pass over the columns.
    pub(crate) fn backward_pair(&self, a: &mut [T], b: &mut [T], to: usize) {
        for k in (0..to).rev() {
            let j = self.order[k];
            let (mut s, mut t) = (a[j], b[j]);
            for &(i, c) in &self.cols[k] {
                s = s - c * a[i];
                t = t - c * b[i];
            }
            a[j] = s / self.diag[k];
            b[j] = t / self.diag[k];
        }
    }

    /// Solves `K_SS x = b`. Only the entries of `b` at contracted states are
    /// read; the result is zero elsewhere.
    pub fn solve_kss(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n());
        let mut r = vec![T::zero(); self.n()];
        for &j in &self.order {
            r[j] = -b[j];
        }
        self.forward(&mut r, 0, self.len());
        self.zero_uncontracted(&mut r);
        self.backward(&mut r, self.len());
        for &j in &self.order {
            r[j] = r[j] * self.pi[j];
        }
        r
    }

    /// Solves `K_SSᵀ x = b`, with the same layout as [`Self::solve_kss`].
    pub fn solve_kss_transpose(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n());
        let mut r = vec![T::zero(); self.n()];
        for &j in &self.order {
            r[j] = -(b[j] * self.pi[j]);
        }
        self.forward(&mut r, 0, self.len());
        self.zero_uncontracted(&mut r);
        self.backward(&mut r, self.len());
        r
    }

    fn zero_uncontracted(&self, r: &mut [T]) {
        for (i, v) in r.iter_mut().enumerate() {
            if self.pos[i] == NONE {
                *v = T::zero();
            }
        }
    }

    /// `Ω p = p_T − K_TS K_SS⁻¹ p_S`, returned over all states with zeros on `S`.
    pub fn omega_apply(&self, p: &[T]) -> Vec<T> {
        let mut r = p.to_vec();
        self.forward(&mut r, 0, self.len());
        for &j in &self.order {
            r[j] = T::zero();
        }
        r
    }

    /// `Ω* z = (−K_SS⁻¹ K_ST z, z)` for `z` supported on `T`.
    pub fn omega_adjoint_apply(&self, z: &[T]) -> Vec<T> {
        self.omega_adjoint_prefix(z, self.len())
    }

    /// [`Self::omega_adjoint_apply`] for the contraction after its first `m` steps.
    pub(crate) fn omega_adjoint_prefix(&self, z: &[T], m: usize) -> Vec<T> {
        let mut a: Vec<T> = z.iter().zip(&self.pi).map(|(&v, &p)| v / p).collect();
        for &j in &self.order[..m] {
            a[j] = T::zero();
        }
        self.backward(&mut a, m);
        for (v, &p) in a.iter_mut().zip(&self.pi) {
            *v = *v * p;
        }
        a
    }

    /// Dense `n × |S|` matrix with column `k` placed at the rows of the states.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut c = DenseMatrix::zeros(self.n(), self.len());
        for k in 0..self.len() {
            c[(self.order[k], k)] = self.diag[k];
            for &(i, v) in &self.cols[k] {
                c[(i, k)] = v;
            }
        }
        c
    }

    /// Total number of stored entries.
    pub fn nnz(&self) -> usize {
        self.len() + self.cols.iter().map(Vec::len).sum::<usize>()
    }
}

/// Forward sweep `r ↦ Ω r` carried along as columns are appended, so that
/// `Ω^(k) p` costs only the new column per step.
#[derive(Debug, Clone)]
pub(crate) struct ForwardSweep<T> {
    r: Vec<T>,
    done: usize,
}

impl<T: Scalar> ForwardSweep<T> {
    pub(crate) fn new(p: &[T]) -> Self {
        Self { r: p.to_vec(), done: 0 }
    }

    pub(crate) fn advance(&mut self, c: &PiCholeskyFactor<T>) {
        c.forward(&mut self.r, self.done, c.len());
        self.done = c.len();
    }

    /// Current `Ω p` at uncontracted states; entries at contracted states are
    /// intermediate values and must be ignored.
    pub(crate) fn raw(&self) -> &[T] {
        &self.r
    }
}
