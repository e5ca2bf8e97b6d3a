use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audit::{run_audit, AuditConfig};
use crate::config::RawConfig;
use crate::error::{CliError, CliResult};
use crate::mi::{run_mi, write_mi_csv, MiConfig};
use crate::sweep::{run_sweep, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "ampcap", version, about = "Capacity bounds for amplitude-constrained MIMO Gaussian channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key = value configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output CSV (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Monte-Carlo sample budget.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_name = "N", env = "AMPCAP_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate bounds over an amplitude grid.
    Sweep(CommonArgs),
    /// Check gap certificates; exits nonzero if any gating certificate fails.
    Audit {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-dimension constant of the PAM gap certificate.
        #[arg(long, value_name = "BITS")]
        pam_constant: Option<f64>,
        /// Human-readable report (defaults next to --out).
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Monte-Carlo mutual information of a discrete input.
    Mi(CommonArgs),
    /// Sweep of the two-antenna diagonal example.
    Fig2(CommonArgs),
    /// Sweep of the 1×3 row-channel example.
    Fig3(CommonArgs),
}

fn load(path: Option<&Path>) -> CliResult<RawConfig> {
    match path {
        Some(p) => RawConfig::load(p),
        None => Err(CliError::config(0, "this subcommand needs --config")),
    }
}

fn reject_config(common: &CommonArgs, what: &str) -> CliResult<()> {
    match common.config {
        Some(_) => Err(CliError::config(0, format!("{what} is a preset and takes no --config"))),
        None => Ok(()),
    }
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p.to_path_buf(), e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(p.to_path_buf(), e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    if workers == Some(0) {
        return Err(CliError::Pool("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn sweep(mut cfg: SweepConfig, common: &CommonArgs) -> CliResult<bool> {
    if let Some(s) = common.seed {
        cfg.budget.seed = s;
    }
    if let Some(n) = common.samples {
        cfg.budget.samples = n;
    }
    let out = common.out.clone().or(cfg.out.clone());
    let table = in_pool(common.workers, || run_sweep(&cfg))??;
    with_output(out.as_deref(), |w| table.write_csv(w))?;
    Ok(true)
}

/// Runs one subcommand. `Ok(false)` means the audit found a failing
/// certificate.
pub fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Sweep(common) => sweep(SweepConfig::from_raw(&load(common.config.as_deref())?)?, &common),
        Command::Fig2(common) => {
            reject_config(&common, "fig2")?;
            sweep(SweepConfig::fig2(), &common)
        }
        Command::Fig3(common) => {
            reject_config(&common, "fig3")?;
            sweep(SweepConfig::fig3(), &common)
        }
        Command::Mi(common) => {
            let mut cfg = MiConfig::from_raw(&load(common.config.as_deref())?)?;
            if let Some(s) = common.seed {
                cfg.budget.seed = s;
            }
            if let Some(n) = common.samples {
                cfg.budget.samples = n;
            }
            let est = in_pool(common.workers, || run_mi(&cfg))??;
            let out = common.out.clone().or(cfg.out.clone());
            with_output(out.as_deref(), |w| write_mi_csv(&cfg, &est, w))?;
            Ok(true)
        }
        Command::Audit {
            common,
            pam_constant,
            report,
        } => {
            let mut cfg = match &common.config {
                Some(p) => AuditConfig::from_raw(&RawConfig::load(p)?)?,
                None => AuditConfig::default(),
            };
            if let Some(c) = pam_constant {
                cfg.pam_constant = c;
            }
            let out = common.out.clone().or(cfg.out.clone());
            let report = report
                .or(cfg.report.clone())
                .or_else(|| out.as_ref().map(|o| o.with_extension("report.txt")));
            let outcome = in_pool(common.workers, || run_audit(&cfg))??;
            with_output(out.as_deref(), |w| outcome.write_csv(w))?;
            match report {
                Some(p) => {
                    let file = File::create(&p).map_err(|e| CliError::io(p.clone(), e))?;
                    outcome
                        .write_report(BufWriter::new(file))
                        .map_err(|e| CliError::io(p.clone(), e))?;
                }
                None => eprintln!(
                    "audit: {} certificates over {} instances, {} gating failures",
                    outcome.certificates.len(),
                    outcome.instances,
                    outcome.failures()
                ),
            }
            Ok(outcome.passed())
        }
    }
}
