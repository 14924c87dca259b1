//! Parallel sweeps over the (delta, gamma) grid with checkpoint and resume.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dissim_core::analysis::{canonical_grid, solve, trs_norms, CellRequest, CorrelationSet, EngineKind};

use crate::config::{Format, Grid, SweepConfig};
use crate::emit::{write_atomic, write_scaling_csv, write_sweep_csv, write_sweep_json, CellRecord, Provenance, ScalingRow, SweepDocument};
use crate::error::{CliError, Result};

/// Environment variable that overrides the configured worker count.
pub const THREADS_ENV: &str = "DISSIM_THREADS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Reuse cells from a checkpoint whose config hash matches.
    pub resume: bool,
    /// Takes precedence over both the environment and the config.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub document: SweepDocument,
    /// Cells solved in this run; the rest came from the checkpoint.
    pub computed: usize,
    pub reused: usize,
}

impl SweepOutcome {
    pub fn all_converged(&self) -> bool {
        self.document.cells.iter().all(|c| c.converged)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    config_hash: String,
    /// (row-major cell index, record)
    cells: Vec<(usize, CellRecord)>,
}

pub fn checkpoint_path(cfg: &SweepConfig) -> PathBuf {
    cfg.outputs.directory.join(format!("{}.checkpoint.json", cfg.outputs.name))
}

pub fn output_path(cfg: &SweepConfig, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    cfg.outputs.directory.join(format!("{}.{ext}", cfg.outputs.name))
}

fn load_checkpoint(path: &Path, hash: &str) -> Result<Vec<(usize, CellRecord)>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?;
    // A checkpoint from a different config is stale, not an error.
    Ok(if cp.config_hash == hash { cp.cells } else { Vec::new() })
}

fn save_checkpoint(path: &Path, hash: &str, cells: &[(usize, CellRecord)]) -> Result<()> {
    let mut sorted = cells.to_vec();
    sorted.sort_by_key(|(i, _)| *i);
    let cp = Checkpoint {
        config_hash: hash.to_owned(),
        cells: sorted,
    };
    write_atomic(path, &serde_json::to_vec(&cp).expect("checkpoint serializes"))
}

fn worker_count(opts: &RunOptions, cfg: &SweepConfig) -> Result<usize> {
    if let Some(w) = opts.workers {
        return Ok(w);
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}='{s}' is not a thread count"))),
        Err(_) => Ok(cfg.run.workers),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "solver panicked".into())
}

/// Solves one point. Failures, panics included, end up in the record.
pub fn evaluate_cell(cfg: &SweepConfig, delta: f64, gamma: f64) -> CellRecord {
    let start = Instant::now();
    let mut rec = CellRecord {
        delta,
        gamma,
        n: cfg.model.n,
        alpha: cfg.model.alpha,
        engine: cfg.engine,
        tau: cfg.tau(),
        p: None,
        m_f: None,
        norm_c: None,
        norm_chi: None,
        converged: false,
        wall_seconds: 0.0,
        error: None,
    };
    let run = || -> Result<_> {
        let mut req = CellRequest::new(cfg.model_at(delta)?, gamma);
        req.dense_cap = cfg.dense_cap;
        req.tau = cfg.tau();
        let want_series = cfg.correlations && cfg.engine != EngineKind::Meanfield;
        let grid = if want_series { canonical_grid() } else { Vec::new() };
        let sol = solve(cfg.engine, &req, &grid)?;
        let norms = match &sol.series {
            Some(s) => Some(trs_norms(&CorrelationSet::from_raw(cfg.model.n, &s.t, &s.xy, &s.yx)?)),
            None => None,
        };
        Ok((sol, norms))
    };
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(Ok((sol, norms))) => {
            rec.m_f = Some(sol.m_f);
            rec.p = sol.p;
            if let Some(d) = norms {
                rec.norm_c = d.norm_c;
                rec.norm_chi = d.norm_chi;
            }
            rec.converged = sol.m_f.is_finite();
            if !rec.converged {
                rec.error = Some("non-finite order parameter".into());
            }
        }
        Ok(Err(e)) => rec.error = Some(e.to_string()),
        Err(payload) => rec.error = Some(panic_message(payload)),
    }
    rec.wall_seconds = start.elapsed().as_secs_f64();
    rec
}

/// Row-major (delta outer, gamma inner) list of grid points.
pub fn grid_points(cfg: &SweepConfig) -> Vec<(f64, f64)> {
    let gammas = cfg.gamma_grid.values();
    cfg.delta_grid
        .values()
        .into_iter()
        .flat_map(|d| gammas.iter().map(move |&g| (d, g)))
        .collect()
}

/// Solves every grid point not already in the checkpoint and writes the
/// configured outputs. The checkpoint is kept afterwards, so rerunning a
/// finished sweep with `resume` recomputes nothing.
pub fn run_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<SweepOutcome> {
    cfg.validate()?;
    let hash = cfg.hash();
    let points = grid_points(cfg);
    let cp_path = checkpoint_path(cfg);
    let prior = if opts.resume {
        load_checkpoint(&cp_path, &hash)?
    } else {
        Vec::new()
    };
    let mut have = vec![false; points.len()];
    for (i, _) in &prior {
        if *i < have.len() {
            have[*i] = true;
        }
    }
    let todo: Vec<usize> = (0..points.len()).filter(|&i| !have[i]).collect();
    let reused = points.len() - todo.len();

    let done = Mutex::new((prior, 0usize, None::<CliError>));
    let interval = cfg.run.checkpoint_interval;
    pool(worker_count(opts, cfg)?)?.install(|| {
        todo.par_iter().for_each(|&i| {
            let (delta, gamma) = points[i];
            let rec = evaluate_cell(cfg, delta, gamma);
            let mut guard = done.lock().expect("checkpoint lock");
            let (cells, fresh, err) = &mut *guard;
            cells.push((i, rec));
            *fresh += 1;
            if *fresh % interval == 0 && err.is_none() {
                if let Err(e) = save_checkpoint(&cp_path, &hash, cells) {
                    *err = Some(e);
                }
            }
        })
    });
    let (mut cells, computed, err) = done.into_inner().expect("checkpoint lock");
    if let Some(e) = err {
        return Err(e);
    }
    save_checkpoint(&cp_path, &hash, &cells)?;
    cells.sort_by_key(|(i, _)| *i);
    cells.dedup_by_key(|(i, _)| *i);

    let document = SweepDocument {
        provenance: Provenance {
            config_hash: hash,
            toolkit_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            seed: cfg.run.seed,
        },
        cells: cells.into_iter().map(|(_, c)| c).collect(),
    };
    for &format in &cfg.outputs.formats {
        let path = output_path(cfg, format);
        match format {
            Format::Csv => write_sweep_csv(&path, &document.cells)?,
            Format::Json => write_sweep_json(&path, &document)?,
        }
    }
    Ok(SweepOutcome {
        document,
        computed,
        reused,
    })
}

/// Diagnostics at the first grid point of `cfg` for each system size,
/// written to `<directory>/<name>_scaling.csv`.
pub fn run_scaling(cfg: &SweepConfig, sizes: &[usize], opts: &RunOptions) -> Result<Vec<(ScalingRow, CellRecord)>> {
    if sizes.is_empty() {
        return Err(CliError::Config("no system sizes given".into()));
    }
    if cfg.engine == EngineKind::Meanfield {
        return Err(CliError::Config("mean field has no finite-size correlations".into()));
    }
    let (delta, gamma) = (cfg.delta_grid.min, cfg.gamma_grid.min);
    let configs = sizes
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.model.n = n;
            c.correlations = true;
            c.delta_grid = Grid::single(delta);
            c.gamma_grid = Grid::single(gamma);
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(ScalingRow, CellRecord)> = pool(worker_count(opts, cfg)?)?.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let rec = evaluate_cell(c, delta, gamma);
                let row = ScalingRow {
                    n: c.model.n,
                    norm_c: rec.norm_c,
                    norm_chi: rec.norm_chi,
                };
                (row, rec)
            })
            .collect()
    });
    let table: Vec<ScalingRow> = rows.iter().map(|(r, _)| *r).collect();
    write_scaling_csv(
        &cfg.outputs.directory.join(format!("{}_scaling.csv", cfg.outputs.name)),
        &table,
    )?;
    Ok(rows)
}
