//! Dense kernels over row-major slices.
//!
//! Reductions use eight independent accumulators combined in a fixed order,
//! so results are reproducible bit-for-bit on one platform while still
//! leaving room for the compiler to vectorize.

use super::Scalar;

#[inline]
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [F::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] = acc[k] + x[k] * y[k];
        }
    }
    let mut tail = F::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail = tail + *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

/// `out = M x` for `M` with `out.len()` rows of `x.len()` columns.
#[inline]
pub fn matvec<F: Scalar>(m: &[F], x: &[F], out: &mut [F]) {
    let cols = x.len();
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o = dot(row, x);
    }
}

/// `out += Mᵀ d` for `M` with `d.len()` rows of `out.len()` columns.
#[inline]
pub fn matvec_t_acc<F: Scalar>(m: &[F], d: &[F], out: &mut [F]) {
    let cols = out.len();
    for (&di, row) in d.iter().zip(m.chunks_exact(cols)) {
        if di != F::zero() {
            axpy(di, row, out);
        }
    }
}

/// `M += d xᵀ`
#[inline]
pub fn outer_acc<F: Scalar>(d: &[F], x: &[F], m: &mut [F]) {
    let cols = x.len();
    for (&di, row) in d.iter().zip(m.chunks_exact_mut(cols)) {
        if di != F::zero() {
            axpy(di, x, row);
        }
    }
}

#[inline]
pub fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}
