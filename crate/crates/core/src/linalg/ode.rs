//! Dormand-Prince 5(4) integrator for linear systems `y' = A y` with
//! continuous output on a caller-supplied time grid.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{norm2, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step allowed relative to `max(|t|, 1)` before giving up.
    pub min_step_ratio: f64,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            max_steps: 10_000_000,
            min_step_ratio: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn lincomb<T: Scalar>(out: &mut [T], base: &[T], terms: &[(f64, &[T])]) {
    for i in 0..out.len() {
        let mut acc = base[i];
        for (c, v) in terms {
            acc += v[i].scale(*c);
        }
        out[i] = acc;
    }
}

/// Integrates `y' = A y` from `t = 0`, calling `visit(index, y(times[index]))`
/// for each point of the ascending, non-negative grid.
///
/// Returns [`Error::Stiffness`] when the accepted step collapses below the
/// configured floor, which for these problems signals stiffness.
pub fn dopri5<T, A, F>(
    op: &A,
    y0: &[T],
    times: &[f64],
    opts: &Dopri5Options,
    mut visit: F,
) -> Result<Dopri5Stats>
where
    T: Scalar,
    A: LinearOperator<T>,
    F: FnMut(usize, &[T]),
{
    let n = op.dim();
    assert_eq!(y0.len(), n);
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("grid times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be sorted ascending".into()));
    }
    let mut stats = Dopri5Stats::default();
    let mut y = y0.to_vec();
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        visit(next, &y);
        next += 1;
    }
    if next == times.len() {
        return Ok(stats);
    }
    let t_end = *times.last().unwrap();

    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut k5 = vec![T::zero(); n];
    let mut k6 = vec![T::zero(); n];
    let mut k7 = vec![T::zero(); n];
    let mut stage = vec![T::zero(); n];
    let mut y_new = vec![T::zero(); n];
    let mut out = vec![T::zero(); n];

    op.apply(&y, &mut k1);
    let mut h = {
        let d0 = norm2(&y).max(1e-300);
        let d1 = norm2(&k1);
        let guess = if d1 > 0.0 { 0.01 * d0 / d1 } else { 1e-3 };
        let anorm = op.norm_estimate();
        let cap = if anorm > 0.0 { 5.0 / anorm } else { t_end };
        guess.min(cap).min(t_end).max(1e-10 * t_end)
    };
    let mut t = 0.0;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::NotConverged {
                iterations: stats.accepted + stats.rejected,
                residual: f64::NAN,
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        lincomb(&mut stage, &y, &[(h * A21, &k1)]);
        op.apply(&stage, &mut k2);
        lincomb(&mut stage, &y, &[(h * A31, &k1), (h * A32, &k2)]);
        op.apply(&stage, &mut k3);
        lincomb(&mut stage, &y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]);
        op.apply(&stage, &mut k4);
        lincomb(
            &mut stage,
            &y,
            &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)],
        );
        op.apply(&stage, &mut k5);
        lincomb(
            &mut stage,
            &y,
            &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)],
        );
        op.apply(&stage, &mut k6);
        lincomb(
            &mut y_new,
            &y,
            &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)],
        );
        op.apply(&y_new, &mut k7);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = (k1[i].scale(E1)
                + k3[i].scale(E3)
                + k4[i].scale(E4)
                + k5[i].scale(E5)
                + k6[i].scale(E6)
                + k7[i].scale(E7))
            .scale(h);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += e.abs2() / (sc * sc);
        }
        let err = (err_sq / n.max(1) as f64).sqrt();

        if err <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            // Dense output on the accepted interval.
            while next < times.len() && times[next] <= t_new {
                let theta = (times[next] - t) / h;
                let theta1 = 1.0 - theta;
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k1[i].scale(h) - ydiff;
                    let r4 = ydiff - k7[i].scale(h) - bspl;
                    let r5 = (k1[i].scale(D1)
                        + k3[i].scale(D3)
                        + k4[i].scale(D4)
                        + k5[i].scale(D5)
                        + k6[i].scale(D6)
                        + k7[i].scale(D7))
                    .scale(h);
                    out[i] = y[i]
                        + (ydiff + (bspl + (r4 + r5.scale(theta1)).scale(theta)).scale(theta1))
                            .scale(theta);
                }
                visit(next, &out);
                next += 1;
            }
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < opts.min_step_ratio * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, step: h });
            }
        }
    }
    while next < times.len() {
        visit(next, &y);
        next += 1;
    }
    Ok(stats)
}
