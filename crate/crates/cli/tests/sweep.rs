use std::path::Path;

use dissim_cli::config::{FloquetBlock, Format, Grid, ModelBlock, OutputBlock, RunBlock, SweepConfig};
use dissim_cli::emit::{read_sweep_csv, CellRecord, SWEEP_HEADER};
use dissim_cli::sweep::{checkpoint_path, output_path};
use dissim_cli::{run_scaling, run_sweep, RunOptions};
use dissim_core::analysis::EngineKind;

fn grid(min: f64, max: f64, count: usize) -> Grid {
    Grid {
        min,
        max,
        count,
        spacing: Default::default(),
    }
}

fn config(dir: &Path, engine: EngineKind, n: usize, deltas: Grid, gammas: Grid) -> SweepConfig {
    SweepConfig {
        engine,
        model: ModelBlock {
            n,
            alpha: 0.0,
            j_sign: 1.0,
        },
        delta_grid: deltas,
        gamma_grid: gammas,
        floquet: None,
        outputs: OutputBlock {
            directory: dir.to_path_buf(),
            formats: vec![Format::Csv, Format::Json],
            name: "sweep".into(),
        },
        run: RunBlock {
            workers: 2,
            seed: 3,
            checkpoint_interval: 2,
        },
        correlations: true,
        dense_cap: 12,
    }
}

/// Everything but the timing column, which is the one field allowed to vary.
fn stable_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_owned())
        .collect()
}

#[test]
fn header_bytes_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), EngineKind::Permsym, 4, grid(0.25, 0.75, 2), grid(0.5, 1.0, 2));
    let out = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let csv_path = output_path(&cfg, Format::Csv);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER);
    assert!(text.starts_with("delta,gamma,n,alpha,engine,tau,p,m_f,norm_c,norm_chi,converged,wall_seconds\n"));

    let back = read_sweep_csv(&csv_path).unwrap();
    let expected: Vec<CellRecord> = out.document.cells.iter().cloned().map(|c| CellRecord { error: None, ..c }).collect();
    assert_eq!(back, expected, "CSV must round-trip bit for bit");

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(output_path(&cfg, Format::Json)).unwrap()).unwrap();
    assert_eq!(json["provenance"]["config_hash"], cfg.hash());
    assert_eq!(json["cells"].as_array().unwrap().len(), 4);
    assert!(out.all_converged());
    // Continuous engine: no period, no reset probability.
    assert!(text.lines().nth(1).unwrap().contains(",permsym,,,"));
}

#[test]
fn cell_order_is_delta_major() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), EngineKind::Meanfield, 10, grid(0.1, 0.3, 3), grid(1.0, 2.0, 2));
    cfg.correlations = false;
    let cells = run_sweep(&cfg, &RunOptions::default()).unwrap().document.cells;
    let pts: Vec<(f64, f64)> = cells.iter().map(|c| (c.delta, c.gamma)).collect();
    assert_eq!(pts, vec![(0.1, 1.0), (0.1, 2.0), (0.2, 1.0), (0.2, 2.0), (0.3, 1.0), (0.3, 2.0)]);
}

#[test]
fn worker_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg_a = config(a.path(), EngineKind::Permsym, 6, grid(0.2, 1.0, 3), grid(0.3, 1.5, 3));
    let cfg_b = config(b.path(), EngineKind::Permsym, 6, grid(0.2, 1.0, 3), grid(0.3, 1.5, 3));
    run_sweep(&cfg_a, &RunOptions { resume: false, workers: Some(1) }).unwrap();
    run_sweep(&cfg_b, &RunOptions { resume: false, workers: Some(4) }).unwrap();
    assert_eq!(
        stable_rows(&output_path(&cfg_a, Format::Csv)),
        stable_rows(&output_path(&cfg_b, Format::Csv))
    );
}

#[test]
fn resume_after_completion_recomputes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), EngineKind::Permsym, 4, grid(0.2, 1.0, 3), grid(0.3, 1.5, 3));
    let first = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!((first.computed, first.reused), (9, 0));
    assert!(checkpoint_path(&cfg).exists());
    let again = run_sweep(&cfg, &RunOptions { resume: true, workers: None }).unwrap();
    assert_eq!((again.computed, again.reused), (0, 9));
    assert_eq!(again.document.cells, first.document.cells);

    // A changed config invalidates the checkpoint.
    let mut other = cfg.clone();
    other.model.n = 3;
    let fresh = run_sweep(&other, &RunOptions { resume: true, workers: None }).unwrap();
    assert_eq!(fresh.computed, 9);
}

#[test]
fn partial_checkpoint_resumes_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), EngineKind::Permsym, 4, grid(0.2, 1.0, 2), grid(0.3, 1.5, 2));
    let full = run_sweep(&cfg, &RunOptions::default()).unwrap();
    // Drop two cells from the checkpoint, as if the run had been killed.
    let path = checkpoint_path(&cfg);
    let mut cp: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    cp["cells"].as_array_mut().unwrap().truncate(2);
    std::fs::write(&path, serde_json::to_vec(&cp).unwrap()).unwrap();
    let resumed = run_sweep(&cfg, &RunOptions { resume: true, workers: None }).unwrap();
    assert_eq!((resumed.computed, resumed.reused), (2, 2));
    let strip = |cs: &[CellRecord]| cs.iter().map(|c| (c.delta, c.gamma, c.m_f, c.norm_c, c.norm_chi)).collect::<Vec<_>>();
    assert_eq!(strip(&resumed.document.cells), strip(&full.document.cells));
}

#[test]
fn meanfield_grid_centre_sits_on_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), EngineKind::Meanfield, 10, grid(0.25, 0.75, 3), grid(0.5, 1.5, 3));
    cfg.correlations = false;
    let cells = run_sweep(&cfg, &RunOptions::default()).unwrap().document.cells;
    let centre = &cells[4];
    assert_eq!((centre.delta, centre.gamma), (0.5, 1.0));
    assert!(centre.m_f.unwrap().abs() < 1e-12, "{:?}", centre.m_f);
    // Inside the ordered region at (0.5, 0.5) the correlator is (1 - gamma^2)/2.
    assert!((cells[3].m_f.unwrap() - 0.375).abs() < 1e-12);
    assert_eq!(cells[5].m_f, Some(0.0));
    assert!(cells.iter().all(|c| c.converged && c.norm_c.is_none()));
}

#[test]
fn dense_and_permsym_sweeps_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dense = config(a.path(), EngineKind::Dense, 6, grid(0.3, 0.9, 2), grid(0.4, 1.2, 2));
    let perm = config(b.path(), EngineKind::Permsym, 6, grid(0.3, 0.9, 2), grid(0.4, 1.2, 2));
    let x = run_sweep(&dense, &RunOptions::default()).unwrap().document.cells;
    let y = run_sweep(&perm, &RunOptions::default()).unwrap().document.cells;
    for (u, v) in x.iter().zip(&y) {
        assert!(u.converged && v.converged);
        for (p, q) in [(u.m_f, v.m_f), (u.norm_c, v.norm_c), (u.norm_chi, v.norm_chi)] {
            let (p, q) = (p.unwrap(), q.unwrap());
            assert!((p - q).abs() < 1e-8, "({}, {}): {p} vs {q}", u.delta, u.gamma);
        }
    }
}

#[test]
fn floquet_cells_carry_period_and_reset_probability() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), EngineKind::FloquetPermsym, 4, grid(0.5, 0.5, 1), grid(1.0, 1.0, 1));
    cfg.floquet = Some(FloquetBlock { tau: 0.5 });
    let cells = run_sweep(&cfg, &RunOptions::default()).unwrap().document.cells;
    assert_eq!(cells[0].tau, Some(0.5));
    assert_eq!(cells[0].p, Some(0.5));
    assert!(cells[0].converged);
}

#[test]
fn failed_cell_is_recorded_and_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    // Delta = 0 has no mean-field solution; the other cell must still be solved.
    let mut cfg = config(dir.path(), EngineKind::Meanfield, 10, grid(0.0, 0.5, 2), grid(1.0, 1.0, 1));
    cfg.correlations = false;
    let out = run_sweep(&cfg, &RunOptions::default()).unwrap();
    let cells = &out.document.cells;
    assert!(!cells[0].converged);
    assert!(cells[0].error.is_some());
    assert_eq!(cells[0].m_f, None);
    assert!(cells[1].converged);
    assert!(!out.all_converged());
    let row = std::fs::read_to_string(output_path(&cfg, Format::Csv)).unwrap();
    assert!(row.lines().nth(1).unwrap().starts_with("0,1,10,0,meanfield,,,,,,false,"));
}

fn scaling_config(dir: &Path, engine: EngineKind) -> SweepConfig {
    config(dir, engine, 2, grid(0.5, 0.5, 1), grid(1.0, 1.0, 1))
}

#[test]
fn scaling_single_size_gives_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let rows = run_scaling(&scaling_config(dir.path(), EngineKind::Permsym), &[8], &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0.n, 8);
}

#[test]
fn scaling_norm_c_shrinks_from_ten_to_twenty() {
    let dir = tempfile::tempdir().unwrap();
    let rows = run_scaling(&scaling_config(dir.path(), EngineKind::Permsym), &[10, 20], &RunOptions::default()).unwrap();
    let (c10, c20) = (rows[0].0.norm_c.unwrap(), rows[1].0.norm_c.unwrap());
    assert!(c20 <= c10, "{c20} > {c10}");
}

#[test]
fn scaling_entry_matches_dense_engine() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let perm = run_scaling(&scaling_config(a.path(), EngineKind::Permsym), &[6], &RunOptions::default()).unwrap();
    let dense = run_scaling(&scaling_config(b.path(), EngineKind::Dense), &[6], &RunOptions::default()).unwrap();
    let (p, d) = (perm[0].0, dense[0].0);
    assert!((p.norm_c.unwrap() - d.norm_c.unwrap()).abs() < 1e-8);
    assert!((p.norm_chi.unwrap() - d.norm_chi.unwrap()).abs() < 1e-8);
}
