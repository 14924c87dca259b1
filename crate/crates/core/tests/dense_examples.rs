//! Dense-engine checks against independent constructions and closed forms.

use dissim_core::analysis::order_parameter_dense;
use dissim_core::dense::{
    build_hamiltonian, build_liouvillian, collective, evolve, evolve_with, protocol_im, site_pauli,
    steady_state_dense, two_time_correlation_dense, Axis, DenseOperator, DenseState, PropagationOptions,
    ProtocolOptions, SuperOperator,
};
use dissim_core::linalg::dense::{eigenvalues, hermitian_eigenvalues};
use dissim_core::linalg::SmallMatrix;
use dissim_core::{build_coupling_matrix, DissipationSpec, ModelSpec, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn hamiltonian(n: usize, alpha: f64, delta: f64) -> DenseOperator {
    let m = ModelSpec::new(n, alpha, delta).unwrap();
    build_hamiltonian(&m, &build_coupling_matrix(&m).unwrap(), 12).unwrap()
}

fn liouvillian(h: &DenseOperator, ge: f64, gd: f64) -> SuperOperator {
    build_liouvillian(h, &DissipationSpec::continuous(ge, gd).unwrap()).unwrap()
}

fn col_major(m: &SmallMatrix) -> Vec<C64> {
    let d = m.rows();
    let mut out = vec![C64::default(); d * d];
    for j in 0..d {
        for i in 0..d {
            out[i + j * d] = m[(i, j)];
        }
    }
    out
}

/// `op` acting on `site` of an `n`-spin chain, by explicit Kronecker products.
fn kron_site(n: usize, site: usize, op: &SmallMatrix) -> SmallMatrix {
    let id = SmallMatrix::identity(2);
    (0..n).fold(SmallMatrix::identity(1), |acc, k| acc.kron(if k == site { op } else { &id }))
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    let (n, alpha, delta) = (4, 1.0, 0.5);
    let x = SmallMatrix::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]);
    let z = SmallMatrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)]]);
    // J_ij proportional to 1/|i-j|, scaled so the average row sum is one.
    let raw = |i: usize, j: usize| 1.0 / (i as f64 - j as f64).abs().powf(alpha);
    let total: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| raw(i, j))).sum();
    let scale = n as f64 / total;
    let mut h = SmallMatrix::zeros(16, 16);
    for i in 0..n {
        for j in i + 1..n {
            h = h.add(&kron_site(n, i, &x).matmul(&kron_site(n, j, &x)).scaled(c(scale * raw(i, j))));
        }
        h = h.sub(&kron_site(n, i, &z).scaled(c(delta)));
    }
    // The open chain is reflection symmetric, so the site ordering of the
    // tensor product does not matter.
    let built = hamiltonian(n, alpha, delta);
    assert!(built.to_small().max_abs_diff(&h) < 1e-12);
    let a = hermitian_eigenvalues(&col_major(&built.to_small()), 16).unwrap();
    let b = hermitian_eigenvalues(&col_major(&h), 16).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn two_spin_ising_spectrum() {
    let h = hamiltonian(2, 0.0, 0.0);
    let e = hermitian_eigenvalues(&col_major(&h.to_small()), 4).unwrap();
    assert_eq!(e.iter().map(|v| v.round() as i32).collect::<Vec<_>>(), vec![-1, -1, 1, 1]);
    assert!(e.iter().all(|v| (v.abs() - 1.0).abs() < 1e-12));
}

#[test]
fn closed_system_spectrum_is_imaginary() {
    let l = liouvillian(&hamiltonian(2, 0.0, 0.6), 0.0, 0.0);
    let csr = l.to_csr();
    let dense = csr.to_dense();
    let m = SmallMatrix::from_rows(&dense);
    for ev in eigenvalues(&m).unwrap() {
        assert!(ev.re.abs() < 1e-10, "{ev}");
    }
}

#[test]
fn steady_state_matches_long_evolution() {
    let l = liouvillian(&hamiltonian(2, 0.0, 0.5), 1.0, 1.0);
    let rho = steady_state_dense(&l).unwrap();
    let late = evolve(&DenseState::maximally_mixed(2), &l, 200.0, 1e-10).unwrap();
    assert!(rho.trace_distance(&late).unwrap() < 1e-7);
}

#[test]
fn evolution_preserves_trace_and_hermiticity() {
    let l = liouvillian(&hamiltonian(3, 1.0, 0.8), 0.7, 0.4);
    let mut rho = DenseState::all_pumped(3);
    for _ in 0..5 {
        rho = evolve(&rho, &l, 0.7, 1e-10).unwrap();
        assert!((rho.trace() - c(1.0)).norm() < 1e-9);
        assert!(rho.hermiticity_error() < 1e-9);
    }
}

#[test]
fn sign_flipped_hamiltonian_gives_conjugate_steady_state() {
    let model = ModelSpec::new(4, 1.0, 0.6).unwrap();
    let j = build_coupling_matrix(&model).unwrap();
    let flipped = model.negated();
    let jf = build_coupling_matrix(&flipped).unwrap();
    let a = steady_state_dense(&liouvillian(&build_hamiltonian(&model, &j, 12).unwrap(), 0.9, 0.9)).unwrap();
    let b = steady_state_dense(&liouvillian(&build_hamiltonian(&flipped, &jf, 12).unwrap(), 0.9, 0.9)).unwrap();
    assert!(a.max_abs_diff(&b.conj()) < 1e-9);
    assert!((order_parameter_dense(&a) - order_parameter_dense(&b)).abs() < 1e-9);
}

#[test]
fn steady_state_has_no_transverse_magnetization() {
    let n = 4;
    let rho = steady_state_dense(&liouvillian(&hamiltonian(n, 1.0, 0.4), 0.5, 0.5)).unwrap();
    for i in 0..n {
        for axis in [Axis::X, Axis::Y] {
            assert!(rho.expectation(&site_pauli(n, i, axis)).norm() < 1e-8);
        }
    }
}

#[test]
fn closed_system_correlation_is_heisenberg_evolution() {
    let n = 4;
    let h = hamiltonian(n, 1.0, 0.7);
    let l = liouvillian(&h, 0.0, 0.0);
    let rho = DenseState::all_pumped(n);
    let (a, b) = (collective(n, Axis::X), collective(n, Axis::Y));
    let grid = [0.0, 0.4, 1.7];
    let got = two_time_correlation_dense(&a, &b, &rho, &l, &grid).unwrap();
    let (hs, as_, bs, rs) = (h.to_small(), a.to_small(), b.to_small(), rho.to_small());
    for (k, &t) in grid.iter().enumerate() {
        let u = hs.scaled(C64::new(0.0, -t)).expm();
        let at = u.adjoint().matmul(&as_).matmul(&u);
        let want = at.matmul(&bs).matmul(&rs).trace();
        assert!((got[k] - want).norm() < 1e-9, "t={t}: {} vs {want}", got[k]);
    }
}

/// Gibbs state of `h`: stationary under the closed evolution.
fn gibbs(h: &DenseOperator, beta: f64) -> DenseState {
    let e = h.to_small().scaled(c(-beta)).expm();
    let z = e.trace();
    DenseState::from_vec(h.n_spins(), col_major(&e.scaled(z.inv()))).unwrap()
}

#[test]
fn kick_protocol_at_zero_delay_reads_local_magnetization() {
    // Im <S^x sigma_i^y> = <sigma_i^z>: the cross-site terms are products of
    // commuting Hermitian operators and have real expectation values.
    let n = 3;
    let h = hamiltonian(n, 1.0, 0.9);
    let l = liouvillian(&h, 0.0, 0.0);
    let rho = gibbs(&h, 0.8);
    let opts = ProtocolOptions {
        samples: 8,
        ..Default::default()
    };
    for site in 0..n {
        let got = protocol_im(&rho, &l, site, &[0.0], &opts).unwrap()[0].exact;
        let z = rho.expectation(&site_pauli(n, site, Axis::Z)).re;
        assert!(z.abs() > 1e-3);
        assert!((got - z).abs() < 1e-10, "site {site}: {got} vs {z}");
    }
}

#[test]
fn kick_protocol_is_antisymmetric_under_axis_swap_at_zero_delay() {
    let n = 2;
    let l = liouvillian(&hamiltonian(n, 0.0, 2.0), 0.2, 0.2);
    let rho = steady_state_dense(&l).unwrap();
    let xy = ProtocolOptions {
        samples: 8,
        ..Default::default()
    };
    let yx = ProtocolOptions {
        local: Axis::X,
        readout: Axis::Y,
        ..xy
    };
    let a = protocol_im(&rho, &l, 0, &[0.0], &xy).unwrap()[0].exact;
    let b = protocol_im(&rho, &l, 0, &[0.0], &yx).unwrap()[0].exact;
    assert!((a + b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn short_and_long_horizons_agree_at_ten_spins() {
    let n = 10;
    let l = liouvillian(&hamiltonian(n, 1.0, 0.5), 1.0, 1.0);
    let opts = PropagationOptions::krylov(1e-10);
    let start = DenseState::all_pumped(n);
    let short = evolve_with(&start, &l, 20.0, &opts).unwrap();
    let long = evolve_with(&short, &l, 80.0, &opts).unwrap();
    let d = (order_parameter_dense(&short) - order_parameter_dense(&long)).abs();
    assert!(d < 1e-3, "M_F changes by {d}");
}
