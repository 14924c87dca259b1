//! Null vector of a sparse matrix by shifted inverse iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

use super::{dot, norm2, CsrMatrix, SparseLu};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversePowerOptions {
    /// Distance of the shift from zero; keeps the factorization regular.
    pub shift: f64,
    /// Stop once `||A x|| <= tol ||x||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Two independent starts closer than this count as the same null vector.
    pub degeneracy_tol: f64,
    pub seed: u64,
}

impl Default for InversePowerOptions {
    fn default() -> Self {
        Self {
            shift: 1e-8,
            tol: 1e-12,
            max_iter: 500,
            degeneracy_tol: 1e-6,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullVector<T> {
    /// Unit 2-norm.
    pub vector: Vec<T>,
    /// `||A x||` for the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

fn random_unit<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..n)
        .map(|_| T::from_c64(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let s = 1.0 / norm2(&v);
    v.iter_mut().for_each(|x| *x = x.scale(s));
    v
}

fn residual<T: Scalar>(a: &CsrMatrix<T>, x: &[T], scratch: &mut [T]) -> f64 {
    a.matvec(x, scratch);
    norm2(scratch)
}

/// Finds the null vector of `a` by inverse iteration on `a - shift I`, run
/// from two random starts. Diverging results mean the null space is not
/// one-dimensional.
pub fn null_vector<T: Scalar>(a: &CsrMatrix<T>, opts: &InversePowerOptions) -> Result<NullVector<T>> {
    let n = a.nrows();
    let shifted = a.add_scaled(T::one(), &CsrMatrix::identity(n), T::from_real(-opts.shift));
    let lu = SparseLu::factor(&shifted)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut scratch = vec![T::zero(); n];
    let mut results: Vec<NullVector<T>> = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut x = random_unit::<T>(&mut rng, n);
        let mut res = residual(a, &x, &mut scratch);
        let mut it = 0;
        while res > opts.tol && it < opts.max_iter {
            lu.solve_in_place(&mut x)?;
            let s = norm2(&x);
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::Linalg("inverse iteration produced a zero vector".into()));
            }
            x.iter_mut().for_each(|v| *v = v.scale(1.0 / s));
            res = residual(a, &x, &mut scratch);
            it += 1;
        }
        if res > opts.tol {
            return Err(Error::NotConverged {
                iterations: it,
                residual: res,
            });
        }
        results.push(NullVector {
            vector: x,
            residual: res,
            iterations: it,
        });
    }
    let second = results.pop().unwrap();
    let first = results.pop().unwrap();
    // Align the global phase before comparing.
    let overlap = dot(&second.vector, &first.vector).to_c64();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let phase_t = T::from_c64(phase.conj());
    let separation = first
        .vector
        .iter()
        .zip(&second.vector)
        .map(|(a, b)| (*a * phase_t - *b).abs2())
        .sum::<f64>()
        .sqrt();
    if separation > opts.degeneracy_tol {
        return Err(Error::DegenerateNullSpace { separation });
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_kernel_of_rank_deficient_matrix() {
        // Generator of a two-state decay chain: kernel is (0, 1).
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, -1.0), (1, 0, 1.0)]);
        let nv = null_vector(&a, &InversePowerOptions::default()).unwrap();
        assert!(nv.vector[0].abs() < 1e-12);
        assert!((nv.vector[1].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_two_dimensional_kernel() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, -1.0)]);
        let err = null_vector(&a, &InversePowerOptions::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateNullSpace { .. }));
    }

    #[test]
    fn complex_kernel() {
        let i = C64::new(0.0, 1.0);
        // [[i, 1], [-1, i]] has kernel (1, -i) / sqrt 2 ... scaled
        let a = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, i), (0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(-1.0, 0.0)), (1, 1, i)],
        );
        let nv = null_vector(&a, &InversePowerOptions::default()).unwrap();
        assert!(nv.residual < 1e-12);
    }
}
