//! CSV and JSON outputs. Every file is written to a sibling temporary and
//! renamed into place, so readers never see a half-written table.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dissim_core::analysis::{CorrelationSet, EngineKind};

use crate::error::{CliError, Result};

pub const SWEEP_HEADER: &str = "delta,gamma,n,alpha,engine,tau,p,m_f,norm_c,norm_chi,converged,wall_seconds";
pub const CORRELATION_HEADER: &str = "t,c_xy,c_yx,chi_xy,chi_yx";
pub const SCALING_HEADER: &str = "n,norm_c,norm_chi";

/// One solved grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub delta: f64,
    pub gamma: f64,
    pub n: usize,
    pub alpha: f64,
    pub engine: EngineKind,
    pub tau: Option<f64>,
    pub p: Option<f64>,
    pub m_f: Option<f64>,
    pub norm_c: Option<f64>,
    pub norm_chi: Option<f64>,
    pub converged: bool,
    pub wall_seconds: f64,
    /// Solver message for cells that did not converge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub toolkit_version: String,
    /// Seconds since the Unix epoch when the sweep finished.
    pub timestamp: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub provenance: Provenance,
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub norm_c: Option<f64>,
    pub norm_chi: Option<f64>,
}

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn parse_opt(field: &str) -> std::result::Result<Option<f64>, std::num::ParseFloatError> {
    if field.is_empty() {
        Ok(None)
    } else {
        field.parse().map(Some)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

fn table(header: &str, rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn sweep_csv(cells: &[CellRecord]) -> Vec<u8> {
    table(
        SWEEP_HEADER,
        cells.iter().map(|c| {
            vec![
                num(c.delta),
                num(c.gamma),
                c.n.to_string(),
                num(c.alpha),
                c.engine.to_string(),
                opt(c.tau),
                opt(c.p),
                opt(c.m_f),
                opt(c.norm_c),
                opt(c.norm_chi),
                c.converged.to_string(),
                num(c.wall_seconds),
            ]
        }),
    )
}

pub fn write_sweep_csv(path: &Path, cells: &[CellRecord]) -> Result<()> {
    write_atomic(path, &sweep_csv(cells))
}

pub fn write_sweep_json(path: &Path, doc: &SweepDocument) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc).expect("document serializes");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn reader(path: &Path, header: &str) -> Result<csv::Reader<std::fs::File>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))?;
    let got = r.headers().map_err(|e| CliError::format(path, e))?;
    if got.iter().collect::<Vec<_>>().join(",") != header {
        return Err(CliError::format(path, format!("expected header '{header}'")));
    }
    Ok(r)
}

/// Parses a sweep table written by [`write_sweep_csv`]. Solver messages are
/// not part of the table, so `error` comes back empty.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<CellRecord>> {
    let mut out = Vec::new();
    for (line, rec) in reader(path, SWEEP_HEADER)?.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        let bad = |what: &str| CliError::format(path, format!("row {}: bad {what}", line + 1));
        let f = |i: usize, what: &str| rec[i].parse::<f64>().map_err(|_| bad(what));
        let o = |i: usize, what: &str| parse_opt(&rec[i]).map_err(|_| bad(what));
        out.push(CellRecord {
            delta: f(0, "delta")?,
            gamma: f(1, "gamma")?,
            n: rec[2].parse().map_err(|_| bad("n"))?,
            alpha: f(3, "alpha")?,
            engine: rec[4].parse().map_err(|_| bad("engine"))?,
            tau: o(5, "tau")?,
            p: o(6, "p")?,
            m_f: o(7, "m_f")?,
            norm_c: o(8, "norm_c")?,
            norm_chi: o(9, "norm_chi")?,
            converged: rec[10].parse().map_err(|_| bad("converged"))?,
            wall_seconds: f(11, "wall_seconds")?,
            error: None,
        });
    }
    Ok(out)
}

pub fn correlation_csv(set: &CorrelationSet) -> Vec<u8> {
    table(
        CORRELATION_HEADER,
        (0..set.t_grid.len()).map(|k| {
            vec![
                num(set.t_grid[k]),
                num(set.c_xy[k]),
                num(set.c_yx[k]),
                num(set.chi_xy[k]),
                num(set.chi_yx[k]),
            ]
        }),
    )
}

pub fn write_correlation_csv(path: &Path, set: &CorrelationSet) -> Result<()> {
    write_atomic(path, &correlation_csv(set))
}

/// Reads a correlation table back; the plateau flag is not stored and comes back as given.
pub fn read_correlation_csv(path: &Path, plateau_subtracted: bool) -> Result<CorrelationSet> {
    let mut cols: [Vec<f64>; 5] = Default::default();
    for rec in reader(path, CORRELATION_HEADER)?.records() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            col.push(field.parse().map_err(|_| CliError::format(path, format!("bad number '{field}'")))?);
        }
    }
    let [t_grid, c_xy, c_yx, chi_xy, chi_yx] = cols;
    Ok(CorrelationSet {
        t_grid,
        c_xy,
        c_yx,
        chi_xy,
        chi_yx,
        plateau_subtracted,
    })
}

pub fn write_scaling_csv(path: &Path, rows: &[ScalingRow]) -> Result<()> {
    let bytes = table(
        SCALING_HEADER,
        rows.iter().map(|r| vec![r.n.to_string(), opt(r.norm_c), opt(r.norm_chi)]),
    );
    write_atomic(path, &bytes)
}
