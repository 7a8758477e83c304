//! Compressed sparse row matrices.
//!
//! This is the carrier for every Laplacian and prolongation operator in the
//! crate. Assembly goes through [`SparseMatrix::from_triplets`], which sorts,
//! coalesces duplicates by summation and drops entries that are exactly zero
//! (or denormal-small), so a finalized matrix never stores explicit zeros and
//! column indices are strictly increasing within each row.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
    symmetric: bool,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Assemble from (row, col, value) triplets. Duplicates are summed;
    /// entries with magnitude below 1e-300 are dropped to keep denormals out
    /// of downstream eliminations.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let tiny = T::from_f64(1e-300).unwrap_or_else(T::zero);
        let mut entries: Vec<(usize, usize, T)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::EdgeOutOfRange {
                    u: r,
                    v: c,
                    n: nrows.max(ncols),
                });
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut it = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v.abs() <= tiny {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
            symmetric: nrows == ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
            symmetric: true,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Mark the matrix as exactly symmetric. The caller vouches that the
    /// entries were assembled mirrored; debug builds verify it.
    pub fn assert_symmetric(mut self) -> Self {
        debug_assert!(self.check_symmetry(), "matrix is not entrywise symmetric");
        self.symmetric = true;
        self
    }

    fn check_symmetry(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if self.get(c, r) != v {
                    return false;
                }
            }
        }
        true
    }

    /// Column indices and values of row `r` (columns strictly increasing).
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        assert_eq!(y.len(), self.nrows, "matvec output dimension mismatch");
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut s = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            y[r] = s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts[..self.ncols].to_vec();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = cursor[c];
                col_idx[slot] = r;
                values[slot] = v;
                cursor[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
            symmetric: self.symmetric,
        }
    }

    /// Sparse-sparse product `self * other` with a dense accumulator per row.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                expected: self.ncols,
                got: other.nrows,
            });
        }
        let n = other.ncols;
        let mut acc = vec![T::zero(); n];
        let mut marker = vec![usize::MAX; n];
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(r);
            for (&k, &v) in cols.iter().zip(vals) {
                let (kcols, kvals) = other.row(k);
                for (&c, &w) in kcols.iter().zip(kvals) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = T::zero();
                        touched.push(c);
                    }
                    acc[c] += v * w;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != T::zero() {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows: self.nrows,
            ncols: n,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        })
    }

    /// C = self * other for a dense right factor.
    pub fn matmul_dense(&self, other: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(self.ncols, other.nrows(), "matmul_dense dimension mismatch");
        let mut c = DenseMatrix::zeros(self.nrows, other.ncols());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let crow = c.row_mut(r);
            for (&k, &v) in cols.iter().zip(vals) {
                let brow = other.row(k);
                for (cj, &bkj) in crow.iter_mut().zip(brow) {
                    *cj += v * bkj;
                }
            }
        }
        c
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= alpha;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            d.set(r, c, v);
        }
        d
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Drop stored entries with |value| <= threshold. Used to remove
    /// cancellation noise before sign classification.
    pub fn dropping_below(&self, threshold: T) -> Self {
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if v.abs() > threshold {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
            symmetric: false,
        }
    }

    /// Infinity norm of `A - A^T`, for diagnostics.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for (r, c, v) in self.iter() {
            let d = (v - self.get(c, r)).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn default_drop_threshold(&self) -> T {
        real::<T>(1e-12) * self.max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_coalesce_and_sort() {
        let m = SparseMatrix::<f64>::from_triplets(
            2,
            3,
            vec![(1, 2, 1.0), (0, 1, 2.0), (1, 2, 3.0), (0, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(0, 0), 0.0);
        let (cols, _) = m.row(0);
        assert!(cols.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn out_of_range_rejected() {
        let r = SparseMatrix::<f64>::from_triplets(2, 2, vec![(0, 5, 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let m =
            SparseMatrix::<f64>::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 1, 3.0)])
                .unwrap();
        let y = m.matvec(&[1.0, 2.0]);
        assert_eq!(y, vec![0.0, 6.0]);
    }

    #[test]
    fn transpose_round_trip() {
        let m = SparseMatrix::<f64>::from_triplets(
            3,
            2,
            vec![(0, 1, 1.0), (2, 0, -2.0), (1, 1, 5.0)],
        )
        .unwrap();
        let t = m.transpose();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t.get(1, 0), 1.0);
        assert_eq!(t.get(0, 2), -2.0);
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::<f64>::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)])
            .unwrap();
        let b = SparseMatrix::<f64>::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 0, 1.0), (2, 1, 4.0)])
            .unwrap();
        let c = a.matmul(&b).unwrap();
        let cd = a.to_dense().matmul(&b.to_dense());
        for r in 0..2 {
            for cidx in 0..2 {
                assert_eq!(c.get(r, cidx), cd.get(r, cidx));
            }
        }
    }

    #[test]
    fn identity_is_symmetric() {
        let i = SparseMatrix::<f64>::identity(4);
        assert!(i.is_symmetric());
        assert_eq!(i.matvec(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
    }
}
