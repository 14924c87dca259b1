//! Steady states and two-time correlations in the symmetric sector.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::Axis;
use crate::error::{Error, Result};
use crate::linalg::{
    distance, expmv, gmres, norm2, null_vector, propagate_grid, CsrMatrix, GmresOptions, InversePowerOptions,
    KrylovOptions, LinearOperator, SparseLu,
};
use crate::scalar::C64;

use super::basis::{Counts, PermBasis};
use super::operators::{build_dissipator_perm, floquet_map_perm, left_multiplier_perm, restrict, PermSuperMatrix, SuperKind};
use super::state::PermState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermSteadyOptions {
    pub inverse_power: InversePowerOptions,
    /// Accept once `||L m|| <= relative_residual * ||m||` in moment coordinates.
    pub relative_residual: f64,
}

impl Default for PermSteadyOptions {
    fn default() -> Self {
        Self {
            inverse_power: InversePowerOptions {
                tol: 1e-11,
                ..Default::default()
            },
            relative_residual: 1e-9,
        }
    }
}

fn scatter_even(basis: &PermBasis, even: &[usize], part: &[f64]) -> Vec<C64> {
    let mut full = vec![C64::default(); basis.dim()];
    for (&i, &v) in even.iter().zip(part) {
        full[i] = C64::new(v, 0.0);
    }
    full
}

/// Unit-trace null vector of a symmetric-sector generator.
///
/// The solve runs on the even sector, which holds every steady state of the
/// model; odd moments vanish by the `Z2` symmetry.
pub fn steady_state_perm(l: &PermSuperMatrix) -> Result<PermState> {
    steady_state_perm_with(l, &PermSteadyOptions::default())
}

pub fn steady_state_perm_with(l: &PermSuperMatrix, opts: &PermSteadyOptions) -> Result<PermState> {
    if l.kind() != SuperKind::Liouvillian {
        return Err(Error::InvalidArgument("steady state needs a generator".into()));
    }
    let basis = PermBasis::new(l.n_spins())?;
    let even = basis.even_indices();
    let g = restrict(&l.real()?, &even);
    let nv = null_vector(&g, &opts.inverse_power)?;
    let m0 = nv.vector[0];
    if m0.abs() < 1e-300 {
        return Err(Error::Linalg("null vector has no trace".into()));
    }
    let v: Vec<f64> = nv.vector.iter().map(|x| x / m0).collect();
    let mut r = vec![0.0; v.len()];
    g.matvec(&v, &mut r);
    let rel = norm2(&r) / norm2(&v);
    if rel > opts.relative_residual {
        return Err(Error::NotConverged {
            iterations: nv.iterations,
            residual: rel,
        });
    }
    PermState::from_moments(&basis, scatter_even(&basis, &even, &v))
}

/// One period of coherent evolution followed by the reset channel,
/// `m -> E exp(tau G_H) m`, applied without forming the product.
#[derive(Debug, Clone)]
pub struct FloquetPropagatorPerm {
    n_spins: usize,
    coherent: CsrMatrix<f64>,
    reset: CsrMatrix<f64>,
    tau: f64,
    p: f64,
    krylov: KrylovOptions,
    failure: RefCell<Option<Error>>,
}

impl FloquetPropagatorPerm {
    /// `coherent` is the generator without dissipation.
    pub fn new(coherent: &PermSuperMatrix, reset: &PermSuperMatrix, tau: f64, p: f64) -> Result<Self> {
        if coherent.kind() != SuperKind::Liouvillian || reset.kind() != SuperKind::ResetMap {
            return Err(Error::InvalidArgument("expected a generator and a reset map".into()));
        }
        if coherent.n_spins() != reset.n_spins() {
            return Err(Error::InvalidArgument("generator and reset map sizes differ".into()));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be non-negative, got {tau}")));
        }
        Ok(Self {
            n_spins: coherent.n_spins(),
            coherent: coherent.real()?,
            reset: reset.real()?,
            tau,
            p,
            krylov: KrylovOptions {
                tol: 1e-13,
                ..Default::default()
            },
            failure: RefCell::new(None),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn restricted(&self, keep: &[usize]) -> Self {
        Self {
            coherent: restrict(&self.coherent, keep),
            reset: restrict(&self.reset, keep),
            failure: RefCell::new(None),
            ..self.clone()
        }
    }

    fn step_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = if self.tau > 0.0 {
            expmv(&self.coherent, self.tau, x, &self.krylov)?
        } else {
            x.to_vec()
        };
        let mut y = vec![0.0; x.len()];
        self.reset.matvec(&u, &mut y);
        Ok(y)
    }

    /// One period applied to a state.
    pub fn step(&self, state: &PermState) -> Result<PermState> {
        let re: Vec<f64> = state.moments().iter().map(|m| m.re).collect();
        let im: Vec<f64> = state.moments().iter().map(|m| m.im).collect();
        let a = self.step_real(&re)?;
        let b = if im.iter().any(|v| *v != 0.0) {
            self.step_real(&im)?
        } else {
            vec![0.0; im.len()]
        };
        let basis = PermBasis::new(self.n_spins)?;
        PermState::from_moments(&basis, a.into_iter().zip(b).map(|(r, i)| C64::new(r, i)).collect())
    }

    /// Forms the full matrix column by column, pruning entries below
    /// `1e-15`; fails once more than `max_nnz` entries survive.
    pub fn materialize(&self, max_nnz: usize) -> Result<PermSuperMatrix> {
        let d = self.coherent.nrows();
        let mut trip = Vec::new();
        let mut e = vec![0.0; d];
        for c in 0..d {
            e[c] = 1.0;
            let col = self.step_real(&e)?;
            e[c] = 0.0;
            trip.extend(col.iter().enumerate().filter(|(_, v)| v.abs() > 1e-15).map(|(r, v)| (r, c, C64::new(*v, 0.0))));
            if trip.len() > max_nnz {
                return Err(Error::MemoryBudget(format!(
                    "propagator has more than {max_nnz} nonzeros; apply it column by column instead"
                )));
            }
        }
        Ok(PermSuperMatrix::new(
            SuperKind::FloquetPropagator,
            self.n_spins,
            CsrMatrix::from_triplets(d, d, trip),
        ))
    }
}

impl LinearOperator<f64> for FloquetPropagatorPerm {
    fn dim(&self) -> usize {
        self.coherent.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self.step_real(x) {
            Ok(v) => y.copy_from_slice(&v),
            Err(e) => {
                y.iter_mut().for_each(|v| *v = f64::NAN);
                self.failure.borrow_mut().get_or_insert(e);
            }
        }
    }

    fn norm_estimate(&self) -> f64 {
        1.0
    }
}

/// `x - K x + e_0 x_0`: the identity moment is the trace.
struct Bordered<'a> {
    k: &'a FloquetPropagatorPerm,
}

impl LinearOperator<f64> for Bordered<'_> {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.k.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - *yi;
        }
        y[0] += x[0];
    }

    fn norm_estimate(&self) -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermFloquetOptions {
    pub gmres: GmresOptions,
    /// Target for `||K m - m|| / ||m||`.
    pub tol: f64,
    /// Periods iterated after the linear solve if it misses `tol`.
    pub polish_periods: usize,
    /// Power iterations used to estimate the second eigenvalue; 0 skips it.
    pub mixing_probe_periods: usize,
    pub seed: u64,
}

impl Default for PermFloquetOptions {
    fn default() -> Self {
        Self {
            gmres: GmresOptions {
                restart: 60,
                tol: 1e-12,
                max_iter: 3000,
            },
            tol: 1e-9,
            polish_periods: 500,
            mixing_probe_periods: 0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermFloquetSteadyState {
    pub state: PermState,
    /// `||K m - m|| / ||m||` of the returned moments.
    pub residual: f64,
    pub gmres_iterations: usize,
    /// Estimated `|lambda_2|`, when probed.
    pub second_eigenvalue: Option<f64>,
    /// Set when `|lambda_2|` is within `1e-12` of one.
    pub slow_mixing: bool,
}

/// Unit-trace fixed point of the stroboscopic map.
///
/// Bordered GMRES, right-preconditioned by the factored continuous-limit
/// generator with rates `p / tau`, on the even sector.
pub fn steady_state_floquet_perm(k: &FloquetPropagatorPerm, opts: &PermFloquetOptions) -> Result<PermFloquetSteadyState> {
    if !(k.p > 0.0) {
        return Err(Error::InvalidParameter("the reset probability must be positive".into()));
    }
    let basis = PermBasis::new(k.n_spins)?;
    let even = basis.even_indices();
    let ks = k.restricted(&even);
    let d = even.len();

    let lu = if k.tau > 0.0 {
        let rate = k.p / k.tau;
        let diss = restrict(&build_dissipator_perm(&basis, rate, rate)?.real()?, &even);
        let gc = ks.coherent.add_scaled(1.0, &diss, 1.0);
        let mut trip: Vec<(usize, usize, f64)> = gc.triplets().map(|(r, c, v)| (r, c, -k.tau * v)).collect();
        trip.push((0, 0, 1.0));
        SparseLu::factor(&CsrMatrix::from_triplets(d, d, trip)).ok()
    } else {
        None
    };
    let precond = |v: &[f64], out: &mut [f64]| {
        out.copy_from_slice(v);
        if let Some(lu) = &lu {
            if lu.solve_in_place(out).is_err() {
                out.copy_from_slice(v);
            }
        }
    };
    let mut rhs = vec![0.0; d];
    rhs[0] = 1.0;
    let mut x = vec![0.0; d];
    let op = Bordered { k: &ks };
    let outcome = gmres(
        &op,
        &rhs,
        &mut x,
        lu.as_ref().map(|_| &precond as &dyn Fn(&[f64], &mut [f64])),
        &opts.gmres,
    );
    if let Some(e) = ks.failure.borrow_mut().take() {
        return Err(e);
    }
    let iterations = match outcome {
        Ok(o) => o.iterations,
        Err(Error::NotConverged { iterations, .. }) => iterations,
        Err(e) => return Err(e),
    };
    let normalize = |x: &mut Vec<f64>| -> Result<()> {
        if !(x[0].abs() > 1e-300) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linalg("fixed-point solve lost the trace".into()));
        }
        let t = x[0];
        x.iter_mut().for_each(|v| *v /= t);
        Ok(())
    };
    normalize(&mut x)?;
    let mut next = ks.step_real(&x)?;
    let mut residual = distance(&next, &x) / norm2(&x);
    let mut history = Vec::new();
    let mut periods = 0;
    while residual > opts.tol {
        if periods >= opts.polish_periods {
            let tail = &history[history.len().saturating_sub(50)..];
            if tail.windows(2).all(|w: &[f64]| w[1] < w[0]) {
                return Err(Error::NotConverged {
                    iterations: iterations + periods,
                    residual,
                });
            }
            return Err(Error::LimitCycle { distance: residual });
        }
        x = next;
        normalize(&mut x)?;
        next = ks.step_real(&x)?;
        residual = distance(&next, &x) / norm2(&x);
        history.push(residual);
        periods += 1;
    }

    let second_eigenvalue = if opts.mixing_probe_periods > 0 {
        Some(second_eigenvalue_estimate(&ks, opts.mixing_probe_periods, opts.seed)?)
    } else {
        None
    };
    Ok(PermFloquetSteadyState {
        state: PermState::from_moments(&basis, scatter_even(&basis, &even, &x))?,
        residual,
        gmres_iterations: iterations,
        second_eigenvalue,
        slow_mixing: second_eigenvalue.is_some_and(|l| l > 1.0 - 1e-12),
    })
}

/// Power iteration on a traceless vector, which the map keeps traceless;
/// the last growth ratio approximates `|lambda_2|`.
fn second_eigenvalue_estimate(k: &FloquetPropagatorPerm, periods: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    v[0] = 0.0;
    let mut ratio = 0.0;
    for _ in 0..periods {
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        v = k.step_real(&v)?;
        ratio = norm2(&v);
    }
    Ok(ratio)
}

/// How a correlation is propagated between the two times.
#[derive(Debug, Clone, Copy)]
pub enum PermEvolution<'a> {
    Continuous(&'a PermSuperMatrix),
    Stroboscopic(&'a FloquetPropagatorPerm),
}

fn collective_class(axis: Axis) -> Counts {
    match axis {
        Axis::X => Counts::new(1, 0, 0),
        Axis::Y => Counts::new(0, 1, 0),
        Axis::Z => Counts::new(0, 0, 1),
    }
}

/// `<S^a(t) S^b(0)>` for every `a` in `probes`, one row per probe.
///
/// Continuous evolution accepts any ascending non-negative grid; the
/// stroboscopic map needs times that are multiples of its period.
pub fn two_time_correlations_perm(
    probes: &[Axis],
    b: Axis,
    rho_s: &PermState,
    evolution: PermEvolution<'_>,
    t_grid: &[f64],
) -> Result<Vec<Vec<C64>>> {
    let n = rho_s.n_spins();
    let basis = PermBasis::new(n)?;
    let x0 = left_multiplier_perm(b, &basis).apply(rho_s);
    let re: Vec<f64> = x0.moments().iter().map(|m| m.re).collect();
    let im: Vec<f64> = x0.moments().iter().map(|m| m.im).collect();
    let slots: Vec<usize> = probes
        .iter()
        .map(|&a| basis.index(collective_class(a)).expect("weight-one classes exist"))
        .collect();
    let mut out = vec![vec![C64::default(); t_grid.len()]; probes.len()];
    let nf = n as f64;
    match evolution {
        PermEvolution::Continuous(l) => {
            if l.kind() != SuperKind::Liouvillian || l.n_spins() != n {
                return Err(Error::InvalidArgument("expected a generator of matching size".into()));
            }
            let g = l.real()?;
            let opts = KrylovOptions {
                tol: 1e-13,
                ..Default::default()
            };
            for (part, unit) in [(&re, C64::new(1.0, 0.0)), (&im, C64::new(0.0, 1.0))] {
                if part.iter().all(|v| *v == 0.0) {
                    continue;
                }
                propagate_grid(&g, part, t_grid, &opts, |ti, w| {
                    for (row, &s) in out.iter_mut().zip(&slots) {
                        row[ti] += unit * (nf * w[s]);
                    }
                })?;
            }
        }
        PermEvolution::Stroboscopic(k) => {
            if k.n_spins() != n {
                return Err(Error::InvalidArgument("map and state sizes differ".into()));
            }
            let periods = stroboscopic_periods(t_grid, k.tau())?;
            let mut state = x0;
            let mut done = 0;
            for (ti, &target) in periods.iter().enumerate() {
                while done < target {
                    state = k.step(&state)?;
                    done += 1;
                }
                for (row, &s) in out.iter_mut().zip(&slots) {
                    row[ti] = state.moments()[s] * nf;
                }
            }
        }
    }
    Ok(out)
}

pub fn two_time_correlation_perm(
    a: Axis,
    b: Axis,
    rho_s: &PermState,
    evolution: PermEvolution<'_>,
    t_grid: &[f64],
) -> Result<Vec<C64>> {
    Ok(two_time_correlations_perm(&[a], b, rho_s, evolution, t_grid)?.remove(0))
}

/// Period counts for a grid of multiples of `tau`.
pub fn stroboscopic_periods(t_grid: &[f64], tau: f64) -> Result<Vec<usize>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("stroboscopic grids need a positive period".into()));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = (t / tau).round();
        if !(t >= 0.0) || (t - k * tau).abs() > 1e-9 * tau.max(t) {
            return Err(Error::InvalidArgument(format!("time {t} is not a multiple of the period {tau}")));
        }
        out.push(k as usize);
    }
    if out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be sorted ascending".into()));
    }
    Ok(out)
}

/// Coherent generator, reset map and their stroboscopic composition for one model.
pub fn floquet_propagator_perm(
    coherent: &PermSuperMatrix,
    reset: &PermSuperMatrix,
    tau: f64,
    p: f64,
) -> Result<FloquetPropagatorPerm> {
    FloquetPropagatorPerm::new(coherent, reset, tau, p)
}

/// Convenience: the reset map for `p` on `basis` composed with `coherent`.
pub fn floquet_propagator_for(coherent: &PermSuperMatrix, basis: &PermBasis, tau: f64, p: f64) -> Result<FloquetPropagatorPerm> {
    FloquetPropagatorPerm::new(coherent, &floquet_map_perm(basis, p)?, tau, p)
}
