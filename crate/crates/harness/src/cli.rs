use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{parse_list, Config};
use crate::error::{HarnessError, Result};

#[derive(Debug, Parser)]
#[command(name = "khm", version, about = "Navier-Stokes runs and exact-law statistics on the 3-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Comma-separated numbers given as one argument.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvList(pub Vec<f64>);

fn csv(s: &str) -> std::result::Result<CsvList, String> {
    parse_list(s).map(CsvList).map_err(|e| format!("{e}"))
}

fn list(x: &Option<CsvList>) -> Option<&[f64]> {
    x.as_ref().map(|c| c.0.as_slice())
}

#[derive(Debug, Args)]
pub struct LawFlags {
    /// Comma-separated scales, overriding the configured inertial range.
    #[arg(long, value_parser = csv)]
    pub ell_list: Option<CsvList>,
    /// Comma-separated L^p exponents; the first feeds the CSV summary.
    #[arg(long, value_parser = csv)]
    pub p_list: Option<CsvList>,
    /// Also evaluate the scale-space balance at every scale.
    #[arg(long)]
    pub khm: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one configuration and write snapshots, ledger and records.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = csv)]
        ell_list: Option<CsvList>,
    },
    /// Structure records for snapshot files.
    Stats {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Supplies the force, quadrature and moment orders.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = csv, required = true)]
        ell_list: CsvList,
        /// Directory for records.ndjson; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the laws on a stored run directory.
    Verify {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        laws: LawFlags,
    },
    /// Simulate and evaluate every configured viscosity.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        laws: LawFlags,
    },
    /// Fit the third-order exponent from law reports or structure records.
    Fit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: &Config) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn write_json(out: Option<&Path>, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = format!("{value}\n");
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, ell_list } => {
            let (cfg, text) = Config::load(&config)?;
            let out = out_dir(out, &cfg);
            let traj = commands::run(&cfg, &text, &out, list(&ell_list))?;
            println!("wrote {} snapshots and {} ledger rows to {}", traj.snapshots.len(), traj.ledger.len(), out.display());
        }
        Command::Stats { files, config, ell_list, out } => {
            let cfg = match config {
                Some(p) => Config::load(&p)?.0,
                None => Config::parse("")?,
            };
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(commands::RECORDS_FILE))?);
                    commands::stats(&files, &cfg, &ell_list.0, &mut f)?;
                    f.flush()?;
                }
                None => commands::stats(&files, &cfg, &ell_list.0, &mut std::io::stdout().lock())?,
            }
        }
        Command::Verify { dir, out, laws } => {
            let out = out.unwrap_or_else(|| dir.clone());
            let report = commands::verify(&dir, &out, list(&laws.ell_list), list(&laws.p_list), laws.khm)?;
            println!("{} cells verified, report in {}", report.cells.len(), out.display());
        }
        Command::Sweep { config, out, workers, laws } => {
            let (cfg, _) = Config::load(&config)?;
            let out = out_dir(out, &cfg);
            let workers = workers.unwrap_or(cfg.workers);
            if workers == 0 {
                return Err(HarnessError::Config("--workers must be >= 1".into()));
            }
            let reports = commands::sweep(&cfg, &out, workers, list(&laws.ell_list), list(&laws.p_list), laws.khm)?;
            println!("swept {} viscosities into {}", reports.len(), out.display());
        }
        Command::Fit { files, alpha, out } => {
            let fit = commands::fit(&files, alpha)?;
            let value = serde_json::json!({
                "schema": 1,
                "zeta_fit": fit.zeta_fit,
                "intercept": fit.intercept,
                "zeta3_lo": fit.zeta3_lo,
                "zeta3_hi": fit.zeta3_hi,
                "in_band": fit.in_band(),
            });
            write_json(out.as_deref(), "fit.json", &value)?;
        }
    }
    Ok(())
}
