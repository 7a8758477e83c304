//! Small dense-vector helpers used throughout the crate.

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// y += alpha * x
#[inline]
pub fn axpy<T: Scalar>(y: &mut [T], alpha: T, x: &[T]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[inline]
pub fn scale<T: Scalar>(y: &mut [T], alpha: T) {
    for yi in y.iter_mut() {
        *yi *= alpha;
    }
}

#[inline]
pub fn mean<T: Scalar>(a: &[T]) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let s: T = a.iter().copied().sum();
    s / T::from_usize(a.len()).unwrap()
}

/// Subtract the mean so the result is orthogonal to the all-ones vector.
#[inline]
pub fn project_out_ones<T: Scalar>(a: &mut [T]) {
    let m = mean(a);
    for ai in a.iter_mut() {
        *ai -= m;
    }
}
