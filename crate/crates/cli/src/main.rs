use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dissim_cli::emit::write_correlation_csv;
use dissim_cli::{point_correlations, run_scaling, run_sweep, CliError, RunOptions, SweepConfig};
use dissim_core::analysis::{canonical_grid, h_sign_audit, trs_norms, CellRequest, EngineKind};
use dissim_core::dense::DEFAULT_DENSE_CAP;
use dissim_core::ModelSpec;

#[derive(Parser)]
#[command(name = "dissim", version, about = "Driven-dissipative long-range Ising sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every point of a (delta, gamma) grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Reuse cells from a matching checkpoint.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Time-reversal diagnostics against system size at the config's first grid point.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write the four correlation series of one point as CSV.
    Correlations {
        #[command(flatten)]
        point: PointArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the long-time plateau of the C series.
        #[arg(long)]
        raw: bool,
    },
    /// Compare the steady states and correlations of H and -H.
    AuditHsign {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "permsym")]
    engine: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    j_sign: f64,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
}

impl PointArgs {
    fn request(&self) -> Result<(EngineKind, CellRequest), CliError> {
        let engine: EngineKind = self.engine.parse()?;
        let model = ModelSpec::new(self.n, self.alpha, self.delta)?.with_j_sign(self.j_sign)?;
        let mut req = CellRequest::new(model, self.gamma);
        req.tau = self.tau;
        req.dense_cap = self.dense_cap;
        Ok((engine, req))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Sweep { config, resume, workers } => {
            let cfg = SweepConfig::load(&config)?;
            let out = run_sweep(&cfg, &RunOptions { resume, workers })?;
            let failed: Vec<_> = out.document.cells.iter().filter(|c| !c.converged).collect();
            eprintln!(
                "{} cells: {} computed, {} from checkpoint, {} not converged",
                out.document.cells.len(),
                out.computed,
                out.reused,
                failed.len()
            );
            for c in &failed {
                eprintln!(
                    "  delta={} gamma={}: {}",
                    c.delta,
                    c.gamma,
                    c.error.as_deref().unwrap_or("unknown")
                );
            }
            Ok(failed.is_empty())
        }
        Command::Scaling { config, n, workers } => {
            let cfg = SweepConfig::load(&config)?;
            let rows = run_scaling(&cfg, &n, &RunOptions { resume: false, workers })?;
            println!("n,norm_c,norm_chi");
            let mut ok = true;
            for (row, rec) in &rows {
                println!("{},{},{}", row.n, fmt_opt(row.norm_c), fmt_opt(row.norm_chi));
                if !rec.converged {
                    eprintln!("  n={}: {}", row.n, rec.error.as_deref().unwrap_or("unknown"));
                    ok = false;
                }
            }
            Ok(ok)
        }
        Command::Correlations { point, out, raw } => {
            let (engine, req) = point.request()?;
            let set = point_correlations(engine, &req, !raw)?;
            match out {
                Some(path) => {
                    write_correlation_csv(&path, &set)?;
                    let d = trs_norms(&set);
                    eprintln!("norm_c={} norm_chi={}", fmt_opt(d.norm_c), fmt_opt(d.norm_chi));
                }
                None => {
                    use std::io::Write;
                    std::io::stdout()
                        .write_all(&dissim_cli::emit::correlation_csv(&set))
                        .map_err(|e| CliError::Io {
                            path: "<stdout>".into(),
                            source: e,
                        })?;
                }
            }
            Ok(true)
        }
        Command::AuditHsign { point, tol } => {
            let (engine, req) = point.request()?;
            let report = h_sign_audit(engine, &req, &canonical_grid(), tol)?;
            println!(
                "M_F {:.3e}  <S^y> {:.3e}  C_xy {:.3e}  chi_xy {:.3e}",
                report.m_f_mismatch, report.s_y_mismatch, report.c_xy_mismatch, report.chi_xy_mismatch
            );
            for v in &report.violations {
                println!("violation: {v}");
            }
            println!("{}", if report.passed() { "PASS" } else { "FAIL" });
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
