//! Dense matrices and the dense kernels behind desk-scale spectral analysis:
//! symmetric eigendecomposition (Householder tridiagonalization followed by
//! implicit-shift QL), Cholesky, and triangular solves.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend(r);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.ncols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.nrows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for c in 0..self.ncols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let row = self.row(r);
                let mut s = T::zero();
                for (a, b) in row.iter().zip(x) {
                    s += *a * *b;
                }
                s
            })
            .collect()
    }

    /// C = self * other, accumulated row-wise so the inner loop is contiguous.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut c = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let arow = self.row(i);
            // split borrow: write into row i of c while reading other
            let crow = &mut c.data[i * other.ncols..(i + 1) * other.ncols];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == T::zero() {
                    continue;
                }
                let brow = other.row(k);
                for (cj, &bkj) in crow.iter_mut().zip(brow) {
                    *cj += aik * bkj;
                }
            }
        }
        c
    }

    /// C = self^T * other without materializing the transpose.
    pub fn matmul_tn(&self, other: &Self) -> Self {
        assert_eq!(self.nrows, other.nrows, "matmul_tn dimension mismatch");
        let mut c = Self::zeros(self.ncols, other.ncols);
        for r in 0..self.nrows {
            let arow = self.row(r);
            let brow = other.row(r);
            for (i, &ari) in arow.iter().enumerate() {
                if ari == T::zero() {
                    continue;
                }
                let crow = &mut c.data[i * other.ncols..(i + 1) * other.ncols];
                for (cj, &brj) in crow.iter_mut().zip(brow) {
                    *cj += ari * brj;
                }
            }
        }
        c
    }

    pub fn symmetrize(&mut self) {
        assert_eq!(self.nrows, self.ncols);
        let half = T::from_f64(0.5).unwrap();
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                let v = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn is_symmetric_within(&self, tol: T) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Eigendecomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: Option<DenseMatrix<T>>,
}

/// Symmetric eigendecomposition. Classic two-stage scheme: Householder
/// reduction to tridiagonal form, then QL iteration with implicit shifts.
pub fn sym_eigen<T: Scalar>(a: &DenseMatrix<T>, want_vectors: bool) -> Result<SymEigen<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSymmetric("sym_eigen"));
    }
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| DenseMatrix::zeros(0, 0)),
        });
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e, want_vectors);
    ql_implicit(&mut d, &mut e, want_vectors.then_some(&mut v))?;
    sort_eigen(&mut d, want_vectors.then_some(&mut v));
    Ok(SymEigen {
        values: d,
        vectors: want_vectors.then_some(v),
    })
}

/// Householder reduction of `v` to tridiagonal form (diagonal `d`,
/// subdiagonal `e` with e[0] = 0). With `accumulate`, `v` is overwritten by
/// the orthogonal transformation matrix.
fn tridiagonalize<T: Scalar>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T], accumulate: bool) {
    let n = d.len();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        // scale to avoid under/overflow
        let mut scale = T::zero();
        let mut h = T::zero();
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
                v.set(j, i, T::zero());
            }
        } else {
            // generate Householder vector
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }

            // apply similarity transformation to remaining columns
            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..(n - 1) {
            v.set(n - 1, i, v.get(i, i));
            v.set(i, i, T::one());
            let h = d[i + 1];
            if h != T::zero() {
                for (k, dk) in d.iter_mut().enumerate().take(i + 1) {
                    *dk = v.get(k, i + 1) / h;
                }
                for j in 0..=i {
                    let mut g = T::zero();
                    for k in 0..=i {
                        g += v.get(k, i + 1) * v.get(k, j);
                    }
                    for (k, &dk) in d.iter().enumerate().take(i + 1) {
                        let val = v.get(k, j) - g * dk;
                        v.set(k, j, val);
                    }
                }
            }
            for k in 0..=i {
                v.set(k, i + 1, T::zero());
            }
        }
        for j in 0..n {
            d[j] = v.get(n - 1, j);
            v.set(n - 1, j, T::zero());
        }
        v.set(n - 1, n - 1, T::one());
    } else {
        // extract the tridiagonal diagonal directly; v is left as scratch
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v.get(j, j);
        }
    }
    e[0] = T::zero();
}

/// QL iteration with implicit shifts on a symmetric tridiagonal matrix.
fn ql_implicit<T: Scalar>(d: &mut [T], e: &mut [T], mut v: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        let t = d[l].abs() + e[l].abs();
        if t > tst1 {
            tst1 = t;
        }
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::InvalidArgument(
                        "symmetric QL iteration failed to converge".into(),
                    ));
                }

                // implicit shift
                let g = d[l];
                let two = T::from_f64(2.0).unwrap();
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                // implicit QL sweep
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(vm) = v.as_deref_mut() {
                        for k in 0..n {
                            let h = vm.get(k, i + 1);
                            vm.set(k, i + 1, s * vm.get(k, i) + c * h);
                            vm.set(k, i, c * vm.get(k, i) - s * h);
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

fn sort_eigen<T: Scalar>(d: &mut [T], mut v: Option<&mut DenseMatrix<T>>) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if let Some(vm) = v.as_deref_mut() {
                for j in 0..vm.nrows() {
                    let t = vm.get(j, i);
                    vm.set(j, i, vm.get(j, k));
                    vm.set(j, k, t);
                }
            }
        }
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub fn cholesky<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::NotSymmetric("cholesky"));
    }
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a.get(j, j);
        {
            let lrow = l.row(j);
            for &x in &lrow[..j] {
                diag -= x * x;
            }
        }
        if diag <= T::zero() {
            return Err(Error::NotPositiveDefinite(j));
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            let base_i = i * n;
            let base_j = j * n;
            for k in 0..j {
                s -= l.data[base_i + k] * l.data[base_j + k];
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

/// Solve L x = b for lower-triangular L, in place.
pub fn forward_solve<T: Scalar>(l: &DenseMatrix<T>, b: &mut [T]) {
    let n = l.nrows();
    for i in 0..n {
        let row = l.row(i);
        let mut s = b[i];
        for k in 0..i {
            s -= row[k] * b[k];
        }
        b[i] = s / row[i];
    }
}

/// Solve L^T x = b for lower-triangular L, in place.
pub fn back_solve_transposed<T: Scalar>(l: &DenseMatrix<T>, b: &mut [T]) {
    let n = l.nrows();
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * b[k];
        }
        b[i] = s / l.get(i, i);
    }
}

/// X = L^{-1} B, column by column with a gather/scatter buffer so the O(n^3)
/// work runs on contiguous memory.
pub fn forward_solve_multi<T: Scalar>(l: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = l.nrows();
    assert_eq!(b.nrows(), n);
    let mut x = DenseMatrix::zeros(n, b.ncols());
    let mut col = vec![T::zero(); n];
    for j in 0..b.ncols() {
        for i in 0..n {
            col[i] = b.get(i, j);
        }
        forward_solve(l, &mut col);
        for i in 0..n {
            x.set(i, j, col[i]);
        }
    }
    x
}

/// Eigenvalues (ascending) of the symmetric-definite pencil A v = lambda B v
/// with B SPD: Cholesky B = L L^T, then the standard-form matrix
/// L^{-1} A L^{-T} is diagonalized.
pub fn spd_pencil_eigenvalues<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<Vec<T>> {
    let l = cholesky(b)?;
    let t = forward_solve_multi(&l, a);
    let mut s = forward_solve_multi(&l, &t.transpose());
    s.symmetrize();
    Ok(sym_eigen(&s, false)?.values)
}
