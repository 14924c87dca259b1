//! Restarted GMRES with optional right preconditioning.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

use super::{dot, norm2, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    /// Target residual relative to `||b||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            tol: 1e-12,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` starting from the contents of `x`.
///
/// `precond`, when given, applies an approximate inverse `M^{-1}` and the
/// iteration runs on `A M^{-1}`.
pub fn gmres<T, A>(
    op: &A,
    b: &[T],
    x: &mut [T],
    precond: Option<&dyn Fn(&[T], &mut [T])>,
    opts: &GmresOptions,
) -> Result<GmresOutcome>
where
    T: Scalar,
    A: LinearOperator<T>,
{
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(GmresOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = opts.restart.clamp(1, n.max(1));
    let mut ax = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let mut total = 0usize;
    let mut rel;

    loop {
        op.apply(x, &mut ax);
        let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok(GmresOutcome {
                iterations: total,
                relative_residual: rel,
            });
        }
        if total >= opts.max_iter {
            return Err(Error::NotConverged {
                iterations: total,
                residual: rel,
            });
        }

        let mut basis: Vec<Vec<T>> = vec![r.iter().map(|v| v.scale(1.0 / beta)).collect()];
        // Hessenberg columns after rotation, kept in complex arithmetic.
        let mut hcols: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<C64> = Vec::with_capacity(m);
        let mut g = vec![C64::new(beta, 0.0)];
        let mut k = 0;
        while k < m && total < opts.max_iter {
            let mut w = vec![T::zero(); n];
            match precond {
                Some(p) => {
                    p(&basis[k], &mut tmp);
                    op.apply(&tmp, &mut w);
                }
                None => op.apply(&basis[k], &mut w),
            }
            let mut h = vec![C64::default(); k + 2];
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &w);
                h[i] = hij.to_c64();
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * *vk;
                }
            }
            let hnext = norm2(&w);
            h[k + 1] = C64::new(hnext, 0.0);
            for i in 0..k {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = a * cs[i] + sn[i] * bb;
                h[i + 1] = -sn[i].conj() * a + bb * cs[i];
            }
            let (a, bb) = (h[k], h[k + 1]);
            let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (1.0, C64::default())
            } else if a.norm() == 0.0 {
                (0.0, bb.conj() / bb.norm())
            } else {
                (a.norm() / r, (a / a.norm()) * bb.conj() / r)
            };
            h[k] = a * c + s * bb;
            h[k + 1] = C64::default();
            let gk = g[k];
            g[k] = gk * c;
            g.push(-s.conj() * gk);
            cs.push(c);
            sn.push(s);
            hcols.push(h);
            total += 1;
            k += 1;
            rel = g[k].norm() / bnorm;
            if hnext > 0.0 {
                basis.push(w.iter().map(|v| v.scale(1.0 / hnext)).collect());
            }
            if rel <= opts.tol || hnext == 0.0 {
                break;
            }
        }

        // Back substitution on the rotated triangle.
        let mut y = vec![C64::default(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (j, yj) in y.iter().enumerate().skip(i + 1) {
                s -= hcols[j][i] * yj;
            }
            if hcols[i][i].norm() == 0.0 {
                return Err(Error::Linalg("GMRES breakdown on a singular system".into()));
            }
            y[i] = s / hcols[i][i];
        }
        let mut update = vec![T::zero(); n];
        for (yi, vi) in y.iter().zip(&basis) {
            let c = T::from_c64(*yi);
            for (u, v) in update.iter_mut().zip(vi) {
                *u += c * *v;
            }
        }
        match precond {
            Some(p) => {
                p(&update, &mut tmp);
                for (xi, ti) in x.iter_mut().zip(&tmp) {
                    *xi += *ti;
                }
            }
            None => {
                for (xi, ui) in x.iter_mut().zip(&update) {
                    *xi += *ui;
                }
            }
        }
        if !rel.is_finite() {
            return Err(Error::NotConverged {
                iterations: total,
                residual: rel,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    fn test_matrix(n: usize) -> CsrMatrix<C64> {
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, C64::new(4.0 + i as f64 * 0.1, 0.5)));
            if i + 1 < n {
                trip.push((i, i + 1, C64::new(-1.0, 0.3)));
                trip.push((i + 1, i, C64::new(-0.7, 0.0)));
            }
            trip.push((i, (i * 7 + 3) % n, C64::new(0.2, -0.1)));
        }
        CsrMatrix::from_triplets(n, n, trip)
    }

    #[test]
    fn solves_nonsymmetric_complex_system() {
        let n = 150;
        let a = test_matrix(n);
        let xs: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut b = vec![C64::default(); n];
        a.matvec(&xs, &mut b);
        let mut x = vec![C64::default(); n];
        let out = gmres(&a, &b, &mut x, None, &GmresOptions { restart: 20, ..Default::default() }).unwrap();
        assert!(out.relative_residual <= 1e-12);
        let err: f64 = x.iter().zip(&xs).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn jacobi_preconditioner_is_applied_on_the_right() {
        let n = 60;
        let a = test_matrix(n);
        let diag: Vec<C64> = (0..n).map(|i| a.get(i, i)).collect();
        let pc = move |v: &[C64], out: &mut [C64]| {
            for i in 0..v.len() {
                out[i] = v[i] / diag[i];
            }
        };
        let b: Vec<C64> = (0..n).map(|i| C64::new(1.0, i as f64 * 0.01)).collect();
        let mut x = vec![C64::default(); n];
        gmres(&a, &b, &mut x, Some(&pc), &GmresOptions::default()).unwrap();
        let mut ax = vec![C64::default(); n];
        a.matvec(&x, &mut ax);
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(res < 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CsrMatrix::<f64>::identity(3);
        let mut x = vec![1.0, 2.0, 3.0];
        gmres(&a, &[0.0; 3], &mut x, None, &GmresOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }
}
