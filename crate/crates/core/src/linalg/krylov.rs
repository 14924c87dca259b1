//! Action of the matrix exponential on a vector by Arnoldi projection with
//! adaptive time stepping and an a-posteriori local error estimate.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

use super::small::SmallMatrix;
use super::{dot, norm2, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Krylov subspace dimension per step.
    pub dim: usize,
    /// Local error tolerance per unit time, relative to the current vector norm.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            dim: 30,
            tol: 1e-11,
            max_steps: 1_000_000,
        }
    }
}

/// Returns `exp(t A) v`.
pub fn expmv<T: Scalar, A: LinearOperator<T>>(
    op: &A,
    t: f64,
    v: &[T],
    opts: &KrylovOptions,
) -> Result<Vec<T>> {
    let mut out = v.to_vec();
    propagate_grid(op, v, &[t], opts, |_, w| out.copy_from_slice(w))?;
    Ok(out)
}

fn round_two_digits(t: f64) -> f64 {
    if t <= 0.0 || !t.is_finite() {
        return t;
    }
    let s = 10f64.powf(t.log10().floor() - 1.0);
    (t / s).ceil() * s
}

/// Propagates `v0` under `exp(t A)` through an ascending grid of
/// non-negative times, handing each grid state to `visit(index, state)`.
///
/// One Arnoldi basis serves every grid time that falls inside its step.
pub fn propagate_grid<T, A, F>(
    op: &A,
    v0: &[T],
    times: &[f64],
    opts: &KrylovOptions,
    mut visit: F,
) -> Result<()>
where
    T: Scalar,
    A: LinearOperator<T>,
    F: FnMut(usize, &[T]),
{
    let n = op.dim();
    assert_eq!(v0.len(), n, "vector length does not match operator dimension");
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("grid times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be sorted ascending".into()));
    }
    let mut w = v0.to_vec();
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        visit(next, &w);
        next += 1;
    }
    if next == times.len() {
        return Ok(());
    }
    let t_end = *times.last().unwrap();
    let m = opts.dim.clamp(1, n.max(1));
    let xm = 1.0 / m as f64;
    let anorm = op.norm_estimate().max(1e-300);
    let btol = 1e-13 * anorm;
    let (gamma, delta) = (0.9, 1.2);
    let fact = ((m as f64 + 1.0) / std::f64::consts::E).powf(m as f64 + 1.0)
        * (2.0 * std::f64::consts::PI * (m as f64 + 1.0)).sqrt();
    let tol = opts.tol;

    let mut beta = norm2(&w);
    let mut t_now = 0.0;
    let mut t_new = round_two_digits((fact * tol / (4.0 * anorm)).powf(xm) / anorm);
    let mut steps = 0usize;
    let mut scratch = vec![T::zero(); n];

    while t_now < t_end {
        if beta == 0.0 {
            while next < times.len() {
                visit(next, &w);
                next += 1;
            }
            return Ok(());
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::NotConverged {
                iterations: steps,
                residual: f64::NAN,
            });
        }
        let mut t_step = (t_end - t_now).min(t_new);

        // Arnoldi with modified Gram-Schmidt.
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(w.iter().map(|x| x.scale(1.0 / beta)).collect());
        let mut h = SmallMatrix::zeros(m + 2, m + 2);
        let mut mb = m;
        let mut k1 = 2usize;
        for j in 0..m {
            let mut p = vec![T::zero(); n];
            op.apply(&basis[j], &mut p);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &p);
                h[(i, j)] = hij.to_c64();
                for (pk, vk) in p.iter_mut().zip(vi) {
                    *pk -= hij * *vk;
                }
            }
            let s = norm2(&p);
            if s < btol {
                k1 = 0;
                mb = j + 1;
                t_step = t_end - t_now;
                break;
            }
            h[(j + 1, j)] = C64::new(s, 0.0);
            let inv = 1.0 / s;
            p.iter_mut().for_each(|x| *x = x.scale(inv));
            basis.push(p);
        }
        let mut avnorm = 0.0;
        if k1 != 0 {
            h[(m + 1, m)] = C64::new(1.0, 0.0);
            op.apply(&basis[m], &mut scratch);
            avnorm = norm2(&scratch);
        }

        let sub = |size: usize, scale: f64| {
            let mut s = SmallMatrix::zeros(size, size);
            for i in 0..size {
                for j in 0..size {
                    s[(i, j)] = h[(i, j)] * scale;
                }
            }
            s
        };

        let mut rejects = 0;
        let (f, err_loc) = loop {
            let mx = mb + k1;
            let f = sub(mx, t_step).expm();
            if k1 == 0 {
                break (f, btol);
            }
            let phi1 = f[(m, 0)].norm();
            let phi2 = f[(m + 1, 0)].norm() * avnorm;
            let err = if phi1 > 10.0 * phi2 {
                phi2
            } else if phi1 > phi2 {
                phi1 * phi2 / (phi1 - phi2)
            } else {
                phi1
            };
            if err <= delta * t_step * tol {
                break (f, err);
            }
            rejects += 1;
            if rejects > 20 {
                return Err(Error::NotConverged {
                    iterations: steps,
                    residual: err,
                });
            }
            t_step = round_two_digits(gamma * t_step * (t_step * tol / err).powf(xm));
            if t_step <= 1e-14 * t_end.max(1.0) {
                return Err(Error::NotConverged {
                    iterations: steps,
                    residual: err,
                });
            }
        };
        let mx = mb + k1.saturating_sub(1);
        let combine = |coef: &SmallMatrix| -> Vec<T> {
            let mut out = vec![T::zero(); n];
            for (i, vi) in basis.iter().enumerate().take(mx) {
                let c = T::from_c64(coef[(i, 0)] * beta);
                for (o, v) in out.iter_mut().zip(vi) {
                    *o += c * *v;
                }
            }
            out
        };

        let t_after = t_now + t_step;
        while next < times.len() && times[next] < t_after - 1e-13 * t_after.max(1.0) {
            let s = times[next] - t_now;
            let fs = sub(mb + k1, s).expm();
            visit(next, &combine(&fs));
            next += 1;
        }
        w = combine(&f);
        t_now = if t_end - t_after <= 1e-13 * t_end.max(1.0) {
            t_end
        } else {
            t_after
        };
        while next < times.len() && times[next] <= t_now + 1e-13 * t_now.max(1.0) {
            visit(next, &w);
            next += 1;
        }
        beta = norm2(&w);
        t_new = round_two_digits(gamma * t_step * (t_step * tol / err_loc.max(1e-300)).powf(xm));
    }
    while next < times.len() {
        visit(next, &w);
        next += 1;
    }
    Ok(())
}
