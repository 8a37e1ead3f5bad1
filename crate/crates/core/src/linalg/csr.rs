use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are sorted and unique inside each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a canonical CSR matrix, summing duplicate `(row, col)` entries.
    pub fn from_triplets(triplets: &[(usize, usize, f64)], n_rows: usize, n_cols: usize) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for (k, &(i, j, v)) in triplets.iter().enumerate() {
            if i >= n_rows || j >= n_cols {
                return Err(Error::Structure(format!(
                    "triplet {k} at ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Structure(format!("triplet {k} at ({i}, {j}) is not finite")));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        // bucket by row
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n_rows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(j, _)| j);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix { n_rows, n_cols, row_ptr: vec![0; n_rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                let v = dense[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(&triplets, dense.nrows(), dense.ncols()).expect("dense entries are in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            out.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.to_triplets() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "mul_vec: x length");
        assert_eq!(y.len(), self.n_rows, "mul_vec: y length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_rows, "mul_transpose_vec: x length");
        let mut y = vec![0.0; self.n_cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        SparseMatrix { n_rows: self.n_cols, n_cols: self.n_rows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut acc = vec![0.0; other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (cols_k, vals_k) = other.row(k);
                for (&j, &b) in cols_k.iter().zip(vals_k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n_rows: self.n_rows, n_cols: other.n_cols, row_ptr, col_idx, values })
    }

    /// `a * self + b * other`
    pub fn add_scaled(&self, a: f64, other: &SparseMatrix, b: f64) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "add {}x{} and {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_idx.push(ja);
                    values.push(a * va[p] + b * vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_idx.push(ja);
                    values.push(a * va[p]);
                    p += 1;
                } else {
                    col_idx.push(jb);
                    values.push(b * vb[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values })
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Keeps only the columns for which `keep[j]` is true (others become structural zeros).
    pub fn filter_columns(&self, keep: &[bool]) -> SparseMatrix {
        assert_eq!(keep.len(), self.n_cols);
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if keep[j] {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }

    /// Principal submatrix on the given (sorted, unique) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SparseMatrix {
        let mut local = vec![usize::MAX; self.n_cols];
        for (k, &g) in idx.iter().enumerate() {
            local[g] = k;
        }
        let mut row_ptr = Vec::with_capacity(idx.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &g in idx {
            let (cols, vals) = self.row(g);
            for (&j, &v) in cols.iter().zip(vals) {
                if local[j] != usize::MAX {
                    col_idx.push(local[j]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { n_rows: idx.len(), n_cols: idx.len(), row_ptr, col_idx, values }
    }

    /// Adds `delta[i]` to each diagonal entry, inserting entries when absent.
    pub fn add_diagonal(&self, delta: &[f64]) -> SparseMatrix {
        let d = SparseMatrix::from_diagonal(delta);
        let d = SparseMatrix { n_cols: self.n_cols, ..d };
        self.add_scaled(1.0, &d, 1.0).expect("square matrix")
    }

    /// Max absolute difference between `A` and `Aᵀ`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let diff = self.add_scaled(1.0, &t, -1.0).expect("square matrix");
        diff.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `xᵀ A x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        ax.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `R A Rᵀ` for sparse `R` (rows × n) and square `A` (n × n).
pub fn triple_product(r: &SparseMatrix, a: &SparseMatrix) -> Result<SparseMatrix> {
    let ra = r.matmul(a)?;
    ra.matmul(&r.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let m = SparseMatrix::from_triplets(&[], 2, 2).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.to_dense(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn identity_from_triplets() {
        let m = SparseMatrix::from_triplets(&[(0, 0, 1.0), (1, 1, 1.0)], 2, 2).unwrap();
        assert_eq!(m, SparseMatrix::identity(2));
    }

    #[test]
    fn out_of_range_is_rejected() {
        assert!(matches!(
            SparseMatrix::from_triplets(&[(2, 0, 1.0)], 2, 2),
            Err(Error::Structure(_))
        ));
        assert!(SparseMatrix::from_triplets(&[(0, 0, f64::NAN)], 1, 1).is_err());
    }

    #[test]
    fn unsorted_columns_are_canonicalized() {
        let m = SparseMatrix::from_triplets(&[(0, 2, 1.0), (0, 0, 4.0), (0, 2, 1.0), (1, 1, 5.0)], 2, 3).unwrap();
        assert_eq!(m.row(0).0, &[0, 2]);
        assert_eq!(m.row(0).1, &[4.0, 2.0]);
        assert_eq!(m.row_ptr(), &[0, 2, 3]);
    }

    #[test]
    fn matmul_and_transpose_match_dense() {
        let a = SparseMatrix::from_triplets(&[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, -1.0)], 3, 3).unwrap();
        let b = SparseMatrix::from_triplets(&[(0, 1, 4.0), (2, 2, 5.0), (1, 0, 1.0)], 3, 3).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.to_dense(), a.to_dense() * b.to_dense());
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        let s = a.add_scaled(2.0, &b, -1.0).unwrap();
        assert_eq!(s.to_dense(), a.to_dense() * 2.0 - b.to_dense());
    }

    #[test]
    fn submatrix_and_filter() {
        let d = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let a = SparseMatrix::from_dense(&d);
        let sub = a.principal_submatrix(&[0, 2]);
        assert_eq!(sub.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 7.0, 9.0]));
        let f = a.filter_columns(&[true, false, true]);
        assert_eq!(f.get(1, 1), 0.0);
        assert_eq!(f.get(1, 2), 6.0);
    }
}
