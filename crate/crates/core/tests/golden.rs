//! Frozen dense-engine outputs for long-range couplings, where no closed form
//! exists. Run with DISSIM_BLESS=1 to rewrite the baselines after an
//! intentional numerical change.

use std::path::PathBuf;

use dissim_core::analysis::{canonical_grid, solve, CellRequest, CorrelationSet, EngineKind};
use dissim_core::ModelSpec;

const TOL: f64 = 1e-8;

fn baseline(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// One line of scalars, then one row per delay: t,c_xy,c_yx,chi_xy,chi_yx.
fn render(delta: f64, gamma: f64) -> String {
    let n = 8;
    let req = CellRequest::new(ModelSpec::new(n, 1.0, delta).unwrap(), gamma);
    let sol = solve(EngineKind::Dense, &req, &canonical_grid()).unwrap();
    let s = sol.series.unwrap();
    let set = CorrelationSet::from_raw(n, &s.t, &s.xy, &s.yx).unwrap().with_plateau_subtracted();
    let mut out = format!("m_f={},s_y={}\n", sol.m_f, sol.s_y);
    for k in 0..set.t_grid.len() {
        out += &format!(
            "{},{},{},{},{}\n",
            set.t_grid[k], set.c_xy[k], set.c_yx[k], set.chi_xy[k], set.chi_yx[k]
        );
    }
    out
}

fn numbers(text: &str) -> Vec<f64> {
    text.split(|c: char| c == ',' || c == '\n' || c == '=')
        .filter_map(|f| f.parse().ok())
        .collect()
}

fn check(name: &str, delta: f64, gamma: f64) {
    let got = render(delta, gamma);
    let path = baseline(name);
    if std::env::var_os("DISSIM_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap();
    let (g, w) = (numbers(&got), numbers(&want));
    assert_eq!(g.len(), w.len());
    assert_eq!(g.len(), 2 + 5 * 100);
    for (k, (a, b)) in g.iter().zip(&w).enumerate() {
        assert!((a - b).abs() <= TOL * (1.0 + b.abs()), "{name} entry {k}: {a} vs {b}");
    }
}

#[test]
fn long_range_near_the_boundary() {
    check("dense_n8_alpha1_d0.5_g1.txt", 0.5, 1.0);
}

#[test]
fn long_range_in_the_ordered_phase() {
    check("dense_n8_alpha1_d0.5_g0.25.txt", 0.5, 0.25);
}
