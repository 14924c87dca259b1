//! Stroboscopic dynamics: Hamiltonian evolution over one period followed by
//! an independent reset channel on every spin.

use crate::error::{Error, Result};
use crate::linalg::dense::{adjoint, hermitian_eigen, matmul};
use crate::linalg::{gmres, CsrMatrix, GmresOptions, LinearOperator, SparseLu};
use crate::model::DissipationSpec;
use crate::scalar::C64;

use super::dynamics::{col_major, contract};
use super::liouvillian::build_liouvillian;
use super::operators::DenseOperator;
use super::state::DenseState;

/// Applies the reset channel with probability `p` to every spin of the
/// column-stacked operator `x`.
pub fn apply_reset_channel(n_spins: usize, p: f64, x: &mut [C64]) {
    let d = 1usize << n_spins;
    assert_eq!(x.len(), d * d);
    for i in 0..n_spins {
        let e = 1usize << i;
        // Populate |1><1| blocks from the |0><0| blocks before those shrink.
        for b in (0..d).filter(|b| b & e != 0) {
            for a in (0..d).filter(|a| a & e != 0) {
                let src = x[(a ^ e) + (b ^ e) * d];
                x[a + b * d] += src * p;
            }
        }
        for b in 0..d {
            for a in 0..d {
                if a & b & e == 0 {
                    x[a + b * d] *= 1.0 - p;
                }
            }
        }
    }
}

/// One period of the stroboscopic map, `rho -> E(U rho U^dagger)`.
#[derive(Debug, Clone)]
pub struct FloquetStep {
    n_spins: usize,
    u: Vec<C64>,
    u_dag: Vec<C64>,
    tau: f64,
    p: f64,
}

impl FloquetStep {
    pub fn new(h: &DenseOperator, tau: f64, p: f64) -> Result<Self> {
        DissipationSpec::floquet(tau, p)?;
        let herm = h.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!("Hamiltonian is not Hermitian (error {herm:e})")));
        }
        let d = h.dim();
        let (vals, vecs) = hermitian_eigen(&col_major(h), d)?;
        // U = V exp(-i lambda tau) V^dagger
        let mut scaled = vecs.clone();
        for (k, lam) in vals.iter().enumerate() {
            let ph = C64::from_polar(1.0, -lam * tau);
            scaled[k * d..(k + 1) * d].iter_mut().for_each(|v| *v *= ph);
        }
        let u = matmul(&scaled, &adjoint(&vecs, d), d);
        let u_dag = adjoint(&u, d);
        Ok(Self {
            n_spins: h.n_spins(),
            u,
            u_dag,
            tau,
            p,
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

    /// Column-major propagator of one period.
    pub fn unitary(&self) -> &[C64] {
        &self.u
    }

    fn map(&self, x: &[C64]) -> Vec<C64> {
        let d = 1usize << self.n_spins;
        let mut y = matmul(&matmul(&self.u, x, d), &self.u_dag, d);
        apply_reset_channel(self.n_spins, self.p, &mut y);
        y
    }

    pub fn apply_state(&self, state: &DenseState) -> DenseState {
        assert_eq!(state.n_spins(), self.n_spins);
        DenseState::from_vec(self.n_spins, self.map(state.as_vec())).expect("size preserved")
    }
}

impl LinearOperator<C64> for FloquetStep {
    fn dim(&self) -> usize {
        1 << (2 * self.n_spins)
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.copy_from_slice(&self.map(x));
    }

    fn norm_estimate(&self) -> f64 {
        1.0
    }
}

/// `E(e^{-iH tau} rho e^{iH tau})`
pub fn floquet_step_dense(state: &DenseState, h: &DenseOperator, tau: f64, p: f64) -> Result<DenseState> {
    if state.n_spins() != h.n_spins() {
        return Err(Error::InvalidArgument("state and Hamiltonian sizes differ".into()));
    }
    Ok(FloquetStep::new(h, tau, p)?.apply_state(state))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetSteadyOptions {
    pub gmres: GmresOptions,
    /// Largest spin count for which the continuous-limit preconditioner is factored.
    pub precondition_max_spins: usize,
    /// Extra periods iterated when the linear solve leaves a residual above `tol`.
    pub polish_periods: usize,
}

impl Default for FloquetSteadyOptions {
    fn default() -> Self {
        Self {
            gmres: GmresOptions {
                restart: 80,
                tol: 1e-13,
                max_iter: 4000,
            },
            precondition_max_spins: 6,
            polish_periods: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseFloquetSteadyState {
    pub state: DenseState,
    /// `||F(rho) - rho||_tr` of the returned state.
    pub distance: f64,
    pub gmres_iterations: usize,
}

/// `x - F x + e_0 Tr(x)`; its solution with right-hand side `e_0` is the
/// unit-trace fixed point (`e_0` is `|0><0|`, which has unit trace).
struct Bordered<'a> {
    step: &'a FloquetStep,
    d: usize,
}

impl LinearOperator<C64> for Bordered<'_> {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let fx = self.step.map(x);
        for ((yi, xi), fi) in y.iter_mut().zip(x).zip(&fx) {
            *yi = xi - fi;
        }
        let tr: C64 = (0..self.d).map(|a| x[a + a * self.d]).sum();
        y[0] += tr;
    }

    fn norm_estimate(&self) -> f64 {
        2.0
    }
}

fn trace_distance(a: &[C64], b: &[C64], n: usize) -> Result<f64> {
    let da = DenseState::from_vec(n, a.to_vec())?;
    da.trace_distance(&DenseState::from_vec(n, b.to_vec())?)
}

/// Unit-trace fixed point of the stroboscopic map within trace distance `tol`.
pub fn floquet_steady_state_dense(h: &DenseOperator, tau: f64, p: f64, tol: f64) -> Result<DenseState> {
    floquet_steady_state_dense_with(h, tau, p, tol, &FloquetSteadyOptions::default()).map(|s| s.state)
}

pub fn floquet_steady_state_dense_with(
    h: &DenseOperator,
    tau: f64,
    p: f64,
    tol: f64,
    opts: &FloquetSteadyOptions,
) -> Result<DenseFloquetSteadyState> {
    let step = FloquetStep::new(h, tau, p)?;
    let n = h.n_spins();
    let d = h.dim();
    let op = Bordered { step: &step, d };
    let mut rhs = vec![C64::default(); d * d];
    rhs[0] = C64::new(1.0, 0.0);
    let mut x = DenseState::all_pumped(n).into_vec();

    // Continuous-limit preconditioner tau (-L) + e_0 Tr with rates p / tau.
    let lu = if n <= opts.precondition_max_spins {
        let rate = p / tau;
        let l = build_liouvillian(h, &DissipationSpec::continuous(rate, rate)?)?;
        let mut trip: Vec<(usize, usize, C64)> = l.to_csr().triplets().map(|(r, c, v)| (r, c, v * -tau)).collect();
        trip.extend((0..d).map(|a| (0, a + a * d, C64::new(1.0, 0.0))));
        Some(SparseLu::factor(&CsrMatrix::from_triplets(d * d, d * d, trip))?)
    } else {
        None
    };
    let precond = |v: &[C64], out: &mut [C64]| {
        out.copy_from_slice(v);
        if let Some(lu) = &lu {
            if lu.solve_in_place(out).is_err() {
                out.copy_from_slice(v);
            }
        }
    };
    let outcome = gmres(
        &op,
        &rhs,
        &mut x,
        lu.as_ref().map(|_| &precond as &dyn Fn(&[C64], &mut [C64])),
        &opts.gmres,
    )?;

    let mut state = DenseState::from_vec(n, x)?;
    state.hermitize();
    let tr = state.trace();
    state.scale(tr.inv());
    let mut next = step.apply_state(&state);
    let mut distance = trace_distance(next.as_vec(), state.as_vec(), n)?;
    // Iterate the map when the solve alone misses the target; a distance
    // that fails to shrink marks an oscillating orbit.
    let mut history = Vec::new();
    let mut k = 0;
    while distance > tol {
        if k >= opts.polish_periods {
            let tail = &history[history.len().saturating_sub(50)..];
            let shrinking = tail.windows(2).all(|w: &[f64]| w[1] < w[0]);
            if shrinking {
                return Err(Error::NotConverged {
                    iterations: k,
                    residual: distance,
                });
            }
            return Err(Error::LimitCycle { distance });
        }
        state = next;
        next = step.apply_state(&state);
        distance = trace_distance(next.as_vec(), state.as_vec(), n)?;
        history.push(distance);
        k += 1;
    }
    Ok(DenseFloquetSteadyState {
        state,
        distance,
        gmres_iterations: outcome.iterations,
    })
}

/// `Tr[A F^k(B rho_s)]` for `k = 0..=periods`, one row per probe.
pub fn floquet_correlations_dense(
    probes: &[&DenseOperator],
    b: &DenseOperator,
    rho_s: &DenseState,
    step: &FloquetStep,
    periods: usize,
) -> Result<Vec<Vec<C64>>> {
    if rho_s.n_spins() != step.n_spins() {
        return Err(Error::InvalidArgument("state and map sizes differ".into()));
    }
    let mut x = rho_s.left_multiply(b).into_vec();
    let mut out = vec![Vec::with_capacity(periods + 1); probes.len()];
    for k in 0..=periods {
        if k > 0 {
            x = step.map(&x);
        }
        for (row, a) in out.iter_mut().zip(probes) {
            row.push(contract(a, &x));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::operators::{build_hamiltonian, site_pauli, Axis};
    use crate::dense::steady_state_dense;
    use crate::model::{build_coupling_matrix, ModelSpec};

    fn hamiltonian(n: usize, alpha: f64, delta: f64) -> DenseOperator {
        let m = ModelSpec::new(n, alpha, delta).unwrap();
        build_hamiltonian(&m, &build_coupling_matrix(&m).unwrap(), 12).unwrap()
    }

    #[test]
    fn half_mixed_single_spin() {
        let h = site_pauli(1, 0, Axis::Z).scaled(C64::new(0.0, 0.0));
        let out = floquet_step_dense(&DenseState::maximally_mixed(1), &h, 0.3, 0.4).unwrap();
        assert!((out.get(0, 0).re - 0.3).abs() < 1e-15);
        assert!((out.get(1, 1).re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn full_reset_and_no_reset() {
        let h = hamiltonian(3, 1.0, 0.7);
        let psi: Vec<C64> = (0..8).map(|k| C64::new(1.0 + k as f64, -(k as f64)).unscale(15.0)).collect();
        let nrm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let rho = DenseState::pure(3, &psi.iter().map(|v| v / nrm).collect::<Vec<_>>());
        let reset = floquet_step_dense(&rho, &h, 0.4, 1.0).unwrap();
        assert!(reset.max_abs_diff(&DenseState::all_pumped(3)) < 1e-14);
        // p = 0 keeps the state pure.
        let unitary = floquet_step_dense(&rho, &h, 0.4, 0.0).unwrap();
        let purity: f64 = unitary.as_vec().iter().map(|v| v.norm_sqr()).sum();
        assert!((purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_matches_brute_force_iteration() {
        let h = hamiltonian(2, 0.0, 0.5);
        let (tau, p) = (0.5, 0.25);
        let fixed = floquet_steady_state_dense(&h, tau, p, 1e-12).unwrap();
        let step = FloquetStep::new(&h, tau, p).unwrap();
        let mut rho = DenseState::maximally_mixed(2);
        for _ in 0..10_000 {
            rho = step.apply_state(&rho);
        }
        assert!(fixed.trace_distance(&rho).unwrap() < 1e-10);
    }

    #[test]
    fn full_reset_fixed_point() {
        let h = hamiltonian(3, 0.0, 0.9);
        let fixed = floquet_steady_state_dense(&h, 2.0, 1.0, 1e-12).unwrap();
        assert!(fixed.max_abs_diff(&DenseState::all_pumped(3)) < 1e-12);
    }

    #[test]
    fn small_period_approaches_continuous_state() {
        let h = hamiltonian(2, 0.0, 0.5);
        let cont = steady_state_dense(
            &build_liouvillian(&h, &DissipationSpec::symmetric(1.0).unwrap()).unwrap(),
        )
        .unwrap();
        let d1 = floquet_steady_state_dense(&h, 1e-2, 1e-2, 1e-12).unwrap().trace_distance(&cont).unwrap();
        let d2 = floquet_steady_state_dense(&h, 5e-3, 5e-3, 1e-12).unwrap().trace_distance(&cont).unwrap();
        assert!(d1 < 5e-2);
        // First order in the period.
        assert!((d1 / d2 - 2.0).abs() < 0.2, "{d1} {d2}");
    }
}
