//! Numerical building blocks shared by the engines.
//!
//! Everything here is matrix-free where possible: operators are passed as
//! [`LinearOperator`] implementations so the dense engine can apply its
//! Liouvillian without materializing a `4^N x 4^N` matrix.

pub mod dense;
pub mod gmres;
pub mod inverse_power;
pub mod krylov;
pub mod lu;
pub mod ode;
pub mod small;
pub mod sparse;

pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use inverse_power::{null_vector, InversePowerOptions, NullVector};
pub use krylov::{expmv, propagate_grid, KrylovOptions};
pub use lu::SparseLu;
pub use ode::{dopri5, Dopri5Options};
pub use small::SmallMatrix;
pub use sparse::CsrMatrix;

use crate::scalar::Scalar;

/// A square linear map applied to vectors.
pub trait LinearOperator<T: Scalar> {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[T], y: &mut [T]);

    /// Cheap upper estimate of an operator norm, used to pick initial step sizes.
    fn norm_estimate(&self) -> f64;
}

impl<T: Scalar, A: LinearOperator<T> + ?Sized> LinearOperator<T> for &A {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) {
        (**self).apply(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        (**self).norm_estimate()
    }
}

/// Hermitian inner product `<x, y> = sum conj(x_i) y_i`.
#[inline]
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = T::zero();
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * *b;
    }
    acc
}

#[inline]
pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

/// `y += a x`
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

#[inline]
pub fn scale_in_place<T: Scalar>(s: T, x: &mut [T]) {
    for v in x.iter_mut() {
        *v *= s;
    }
}

/// Euclidean distance between two vectors.
pub fn distance<T: Scalar>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (*a - *b).abs2())
        .sum::<f64>()
        .sqrt()
}
