//! Time evolution, steady states and two-time correlations under a
//! continuous generator.
//!
//! Generators built from a model Hamiltonian are propagated in Pauli
//! coordinates, one spin-flip sector at a time and in real arithmetic when
//! the sector vector is real. Any other Hamiltonian falls back to the
//! column-stacked representation.

use crate::error::{Error, Result};
use crate::linalg::{
    dopri5, norm2, null_vector, propagate_grid, Dopri5Options, InversePowerOptions, KrylovOptions, LinearOperator,
};
use crate::scalar::{Scalar, C64};

use super::liouvillian::SuperOperator;
use super::operators::DenseOperator;
use super::pauli::{
    compact_index, matrix_from_moments, moments_from_matrix, scatter_sector, sector_part, Parity, PauliPair,
};
use super::state::DenseState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Dormand-Prince 5(4) with dense output.
    RungeKutta,
    /// Adaptive Krylov approximation of the propagator.
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    /// Local error tolerance (relative for Runge-Kutta, per unit time for Krylov).
    pub tol: f64,
    pub krylov_dim: usize,
}

impl PropagationOptions {
    pub fn runge_kutta(tol: f64) -> Self {
        Self {
            integrator: Integrator::RungeKutta,
            tol,
            krylov_dim: 15,
        }
    }

    pub fn krylov(tol: f64) -> Self {
        Self {
            integrator: Integrator::Krylov,
            tol,
            krylov_dim: 15,
        }
    }
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self::runge_kutta(1e-9)
    }
}

fn run<T: Scalar, A: LinearOperator<T>>(
    op: &A,
    v0: &[T],
    times: &[f64],
    opts: &PropagationOptions,
    visit: impl FnMut(usize, &[T]),
) -> Result<()> {
    match opts.integrator {
        Integrator::Krylov => {
            let k = KrylovOptions {
                dim: opts.krylov_dim,
                tol: opts.tol,
                ..Default::default()
            };
            propagate_grid(op, v0, times, &k, visit)
        }
        Integrator::RungeKutta => {
            let o = Dopri5Options {
                rtol: opts.tol,
                atol: opts.tol * 1e-2,
                ..Default::default()
            };
            dopri5(op, v0, times, &o, visit).map(|_| ())
        }
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be sorted ascending".into()));
    }
    Ok(())
}

/// Column-major dense copy of an operator.
pub(crate) fn col_major(op: &DenseOperator) -> Vec<C64> {
    let d = op.dim();
    let mut out = vec![C64::default(); d * d];
    for (r, c, v) in op.matrix().triplets() {
        out[r + c * d] = v;
    }
    out
}

/// `Tr(A X)` for a column-stacked `X`.
pub(crate) fn contract(op: &DenseOperator, x: &[C64]) -> C64 {
    let d = op.dim();
    let mut acc = C64::default();
    for a in 0..d {
        for (k, v) in op.matrix().row(a) {
            acc += v * x[k + a * d];
        }
    }
    acc
}

struct Propagated {
    /// `values[probe][time]`
    values: Vec<Vec<C64>>,
    final_state: Option<Vec<C64>>,
}

/// Propagates the column-stacked operator `x0` through `times`, recording
/// `Tr(A X(t))` for every probe `A` and optionally the state at the last time.
fn propagate(
    l: &SuperOperator,
    x0: &[C64],
    times: &[f64],
    opts: &PropagationOptions,
    probes: &[&DenseOperator],
    want_final: bool,
) -> Result<Propagated> {
    check_grid(times)?;
    let mut values = vec![vec![C64::default(); times.len()]; probes.len()];
    if times.is_empty() {
        return Ok(Propagated {
            values,
            final_state: want_final.then(|| x0.to_vec()),
        });
    }
    let last = times.len() - 1;
    let Ok(pair) = PauliPair::from_liouvillian(l) else {
        let mut final_state = None;
        run(l, x0, times, opts, |k, v: &[C64]| {
            for (row, a) in values.iter_mut().zip(probes) {
                row[k] = contract(a, v);
            }
            if want_final && k == last {
                final_state = Some(v.to_vec());
            }
        })?;
        return Ok(Propagated { values, final_state });
    };

    let n = l.n_spins();
    let d = 1usize << n;
    let scale = 1.0 / d as f64;
    let full = moments_from_matrix(n, x0);
    let probe_moments: Vec<Vec<C64>> = probes.iter().map(|a| moments_from_matrix(n, &col_major(a))).collect();
    let mut final_full = want_final.then(|| vec![C64::default(); d * d]);
    for parity in [Parity::Even, Parity::Odd] {
        let part = sector_part(n, parity, &full);
        if part.iter().all(|v| *v == C64::default()) {
            continue;
        }
        let weights: Vec<Vec<C64>> = probe_moments
            .iter()
            .map(|m| sector_part(n, parity, m).into_iter().map(|w| w * scale).collect())
            .collect();
        let generator = pair.sector(parity);
        let mut final_part: Option<Vec<C64>> = None;
        if part.iter().all(|v| v.im == 0.0) {
            let re: Vec<f64> = part.iter().map(|v| v.re).collect();
            run(generator, &re, times, opts, |k, v: &[f64]| {
                for (row, w) in values.iter_mut().zip(&weights) {
                    row[k] += w.iter().zip(v).map(|(w, x)| w * *x).sum::<C64>();
                }
                if want_final && k == last {
                    final_part = Some(v.iter().map(|x| C64::new(*x, 0.0)).collect());
                }
            })?;
        } else {
            run(generator, &part, times, opts, |k, v: &[C64]| {
                for (row, w) in values.iter_mut().zip(&weights) {
                    row[k] += w.iter().zip(v).map(|(w, x)| w * x).sum::<C64>();
                }
                if want_final && k == last {
                    final_part = Some(v.to_vec());
                }
            })?;
        }
        if let (Some(f), Some(p)) = (final_full.as_mut(), final_part) {
            scatter_sector(n, parity, &p, f);
        }
    }
    Ok(Propagated {
        values,
        final_state: final_full.map(|m| matrix_from_moments(n, &m)),
    })
}

/// `rho(t_final)` for `d rho / dt = L rho`, by adaptive Runge-Kutta with local
/// error `tol`.
pub fn evolve(state: &DenseState, l: &SuperOperator, t_final: f64, tol: f64) -> Result<DenseState> {
    evolve_with(state, l, t_final, &PropagationOptions::runge_kutta(tol))
}

pub fn evolve_with(state: &DenseState, l: &SuperOperator, t_final: f64, opts: &PropagationOptions) -> Result<DenseState> {
    check_same_size(state, l)?;
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok(state.clone());
    }
    let out = propagate(l, state.as_vec(), &[t_final], opts, &[], true)?;
    DenseState::from_vec(state.n_spins(), out.final_state.expect("final state requested"))
}

fn check_same_size(state: &DenseState, l: &SuperOperator) -> Result<()> {
    if state.n_spins() != l.n_spins() {
        return Err(Error::InvalidArgument(format!(
            "state has {} spins but the generator has {}",
            state.n_spins(),
            l.n_spins()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyStateMethod {
    InversePower { iterations: usize },
    Evolution { time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSteadyState {
    pub state: DenseState,
    /// `||L rho||_2` on the column-stacked state.
    pub residual: f64,
    /// `||L||_F`
    pub generator_norm: f64,
    pub method: SteadyStateMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Largest spin count solved by factorization; above it the state is
    /// found by evolving until the residual criterion holds.
    pub factorization_max_spins: usize,
    pub inverse_power: InversePowerOptions,
    /// Required `||L rho|| / ||L||_F`.
    pub relative_residual: f64,
    /// Longest evolution time before giving up.
    pub horizon: f64,
    /// Evolution time between residual checks.
    pub chunk: f64,
    pub propagation: PropagationOptions,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            factorization_max_spins: 7,
            inverse_power: InversePowerOptions::default(),
            relative_residual: 1e-10,
            horizon: 2000.0,
            chunk: 5.0,
            propagation: PropagationOptions::krylov(1e-10),
        }
    }
}

/// Steady state of `l` with default options.
pub fn steady_state_dense(l: &SuperOperator) -> Result<DenseState> {
    steady_state_dense_with(l, &SteadyStateOptions::default()).map(|s| s.state)
}

pub fn steady_state_dense_with(l: &SuperOperator, opts: &SteadyStateOptions) -> Result<DenseSteadyState> {
    let n = l.n_spins();
    match PauliPair::from_liouvillian(l) {
        Ok(pair) => steady_state_pauli(l, &pair, opts),
        Err(_) if n <= opts.factorization_max_spins => steady_state_vectorized_lu(l, opts),
        Err(_) => steady_state_vectorized_evolution(l, opts),
    }
}

fn steady_state_pauli(l: &SuperOperator, pair: &PauliPair, opts: &SteadyStateOptions) -> Result<DenseSteadyState> {
    let n = l.n_spins();
    let g = &pair.even;
    let norm = pair.frobenius_norm();
    // The column-stacked 2-norm is the moment 2-norm times 2^{-N/2}.
    let to_vec_norm = (-(n as f64) * 0.5 * std::f64::consts::LN_2).exp();
    let target = opts.relative_residual * norm;
    let identity = compact_index(n, 0, 0);
    let dim = LinearOperator::<f64>::dim(g);
    let mut scratch = vec![0.0; dim];
    let (moments, method) = if n <= opts.factorization_max_spins {
        let nv = null_vector(&g.to_csr(), &opts.inverse_power)?;
        let mut m = nv.vector;
        let t = m[identity];
        if t.abs() < 1e-300 {
            return Err(Error::Linalg("null vector has zero trace".into()));
        }
        m.iter_mut().for_each(|v| *v /= t);
        (m, SteadyStateMethod::InversePower { iterations: nv.iterations })
    } else {
        // Start from the pumped product state |1...1><1...1|.
        let mut m = vec![0.0; dim];
        for s in 0..1usize << n {
            m[compact_index(n, 0, s)] = if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        }
        let mut t = 0.0;
        loop {
            g.apply(&m, &mut scratch);
            let res = norm2(&scratch) * to_vec_norm;
            if res <= target {
                break;
            }
            if t >= opts.horizon {
                return Err(Error::NotConverged {
                    iterations: (t / opts.chunk).round() as usize,
                    residual: res / norm,
                });
            }
            let mut next = None;
            run(g, &m, &[opts.chunk], &opts.propagation, |_, v: &[f64]| next = Some(v.to_vec()))?;
            m = next.expect("grid point visited");
            t += opts.chunk;
        }
        (m, SteadyStateMethod::Evolution { time: t })
    };
    g.apply(&moments, &mut scratch);
    let residual = norm2(&scratch) * to_vec_norm;
    if residual > target {
        return Err(Error::NotConverged {
            iterations: 0,
            residual: residual / norm,
        });
    }
    let d = 1usize << n;
    let mut full = vec![C64::default(); d * d];
    let complex: Vec<C64> = moments.iter().map(|v| C64::new(*v, 0.0)).collect();
    scatter_sector(n, Parity::Even, &complex, &mut full);
    let mut state = DenseState::from_vec(n, matrix_from_moments(n, &full))?;
    state.hermitize();
    Ok(DenseSteadyState {
        state,
        residual,
        generator_norm: norm,
        method,
    })
}

fn vectorized_trace_normalize(n: usize, mut v: Vec<C64>) -> Result<DenseState> {
    let d = 1usize << n;
    let t: C64 = (0..d).map(|a| v[a + a * d]).sum();
    if t.norm() < 1e-300 {
        return Err(Error::Linalg("null vector has zero trace".into()));
    }
    v.iter_mut().for_each(|x| *x /= t);
    let mut s = DenseState::from_vec(n, v)?;
    s.hermitize();
    Ok(s)
}

fn vectorized_residual(l: &SuperOperator, state: &DenseState) -> f64 {
    let mut y = vec![C64::default(); state.as_vec().len()];
    l.apply(state.as_vec(), &mut y);
    norm2(&y)
}

fn steady_state_vectorized_lu(l: &SuperOperator, opts: &SteadyStateOptions) -> Result<DenseSteadyState> {
    let norm = l.frobenius_norm();
    let nv = null_vector(&l.to_csr(), &opts.inverse_power)?;
    let state = vectorized_trace_normalize(l.n_spins(), nv.vector)?;
    let residual = vectorized_residual(l, &state);
    if residual > opts.relative_residual * norm {
        return Err(Error::NotConverged {
            iterations: nv.iterations,
            residual: residual / norm,
        });
    }
    Ok(DenseSteadyState {
        state,
        residual,
        generator_norm: norm,
        method: SteadyStateMethod::InversePower { iterations: nv.iterations },
    })
}

fn steady_state_vectorized_evolution(l: &SuperOperator, opts: &SteadyStateOptions) -> Result<DenseSteadyState> {
    let n = l.n_spins();
    let norm = l.frobenius_norm();
    let mut state = DenseState::all_pumped(n);
    let mut t = 0.0;
    loop {
        let res = vectorized_residual(l, &state);
        if res <= opts.relative_residual * norm {
            state.hermitize();
            return Ok(DenseSteadyState {
                state,
                residual: res,
                generator_norm: norm,
                method: SteadyStateMethod::Evolution { time: t },
            });
        }
        if t >= opts.horizon {
            return Err(Error::NotConverged {
                iterations: (t / opts.chunk).round() as usize,
                residual: res / norm,
            });
        }
        state = evolve_with(&state, l, opts.chunk, &opts.propagation)?;
        t += opts.chunk;
    }
}

/// `<A(t) B(0)> = Tr[A e^{Lt}(B rho_s)]` on an ascending grid.
pub fn two_time_correlation_dense(
    a: &DenseOperator,
    b: &DenseOperator,
    rho_s: &DenseState,
    l: &SuperOperator,
    t_grid: &[f64],
) -> Result<Vec<C64>> {
    let mut out = two_time_correlations_dense_with(&[a], b, rho_s, l, t_grid, &PropagationOptions::krylov(1e-12))?;
    Ok(out.pop().expect("one probe"))
}

/// Several observables `A_k` against the same `B`, sharing one propagation.
pub fn two_time_correlations_dense_with(
    probes: &[&DenseOperator],
    b: &DenseOperator,
    rho_s: &DenseState,
    l: &SuperOperator,
    t_grid: &[f64],
    opts: &PropagationOptions,
) -> Result<Vec<Vec<C64>>> {
    check_same_size(rho_s, l)?;
    check_grid(t_grid)?;
    let x0 = rho_s.left_multiply(b);
    Ok(propagate(l, x0.as_vec(), t_grid, opts, probes, false)?.values)
}

/// `Tr[A e^{Lt} X]` for an arbitrary initial operator `X`.
pub fn propagate_expectations(
    probes: &[&DenseOperator],
    x0: &DenseState,
    l: &SuperOperator,
    t_grid: &[f64],
    opts: &PropagationOptions,
) -> Result<Vec<Vec<C64>>> {
    check_same_size(x0, l)?;
    Ok(propagate(l, x0.as_vec(), t_grid, opts, probes, false)?.values)
}
