//! Minimal column-oriented sparse matrix.

use crate::scalar::Scalar;

/// Square or rectangular sparse matrix stored column by column. Each column
/// holds `(row, value)` pairs sorted by row with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, cols: vec![Vec::new(); n_cols] }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); n_cols];
        for &(i, j, v) in triplets {
            assert!(i < n_rows && j < n_cols, "triplet ({i}, {j}) out of bounds");
            cols[j].push((i, v));
        }
        for col in &mut cols {
            col.sort_by_key(|&(i, _)| i);
            let mut merged: Vec<(usize, T)> = Vec::with_capacity(col.len());
            for &(i, v) in col.iter() {
                match merged.last_mut() {
                    Some((last, acc)) if *last == i => *acc = *acc + v,
                    _ => merged.push((i, v)),
                }
            }
            merged.retain(|&(_, v)| v != T::zero());
            *col = merged;
        }
        Self { n_rows, n_cols, cols }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn col(&self, j: usize) -> &[(usize, T)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self.cols[j].binary_search_by_key(&i, |&(r, _)| r) {
            Ok(pos) => self.cols[j][pos].1,
            Err(_) => T::zero(),
        }
    }

    /// Iterates over stored entries as `(row, col, value)`, column-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![T::zero(); self.n_rows];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj == T::zero() {
                continue;
            }
            for &(i, v) in col {
                y[i] = y[i] + v * xj;
            }
        }
        y
    }

    pub fn transpose_matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_rows);
        self.cols
            .iter()
            .map(|col| col.iter().fold(T::zero(), |acc, &(i, v)| acc + v * x[i]))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n_cols, self.n_rows, &triplets)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter() {
            out[i][j] = v;
        }
        out
    }

    /// Applies `f` to every stored value.
    pub fn map<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> SparseMatrix<U> {
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|&(i, v)| (i, f(v))).collect())
                .collect(),
        }
    }

    /// Principal or off-diagonal block `A[rows, cols]` re-indexed to `0..rows.len()`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut row_pos = vec![usize::MAX; self.n_rows];
        for (p, &r) in rows.iter().enumerate() {
            row_pos[r] = p;
        }
        let mut triplets = Vec::new();
        for (q, &c) in cols.iter().enumerate() {
            for &(i, v) in &self.cols[c] {
                if row_pos[i] != usize::MAX {
                    triplets.push((row_pos[i], q, v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &triplets)
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> T {
        self.iter().fold(T::zero(), |m, (_, _, v)| m.max(v.abs()))
    }
}
