//! Command-line front end.
//!
//! Every subcommand reads a JSON [`RunConfig`] and writes CSV, prefixed with
//! `#` comment lines carrying the tool version, the command and the SHA-256 of
//! the effective configuration. Exit codes: 0 success, 1 internal failure,
//! 2 configuration error, 3 invalid parameter regime, 4 failed check.

mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{verify_report, CheckRecord, Verdict, VerifyReport};
pub use config::{FamilyChoice, RunConfig};

pub const TOOL_VERSION: &str = concat!("xychain ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Regime(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Other(_) => 1,
            Self::Config(_) => 2,
            Self::Regime(_) => 3,
            Self::CheckFailed(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xychain", version, about = "Exactly solvable XY chains from q-Racah contiguity relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the spectral agreement tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides the config family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyChoice>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-particle energies, analytic and numeric.
    Spectrum(CommonArgs),
    /// Couplings alpha, beta, gamma per site.
    ChainCoeffs(CommonArgs),
    /// Run every applicable certification; exit 4 if any fails.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// All 2^(N+1) many-body energies.
    Manybody(CommonArgs),
    /// Random search for valid q-Racah parameters.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides `scan.samples`.
        #[arg(long)]
        samples: Option<usize>,
    },
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Config(format!("--tol must be a positive number, got {tol}")));
            }
            cfg.tolerances.spectrum = tol;
        }
        if let Some(family) = self.family {
            cfg.family = family;
        }
        Ok(cfg)
    }
}

/// CSV body plus the comment lines that precede it.
#[derive(Debug)]
pub(crate) struct Table {
    pub command: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn render(&self, cfg: &RunConfig) -> Result<String, CliError> {
        let mut out = format!("# {TOOL_VERSION}\n# command: {}\n# config-sha256: {}\n", self.command, cfg.digest());
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Other(format!("csv: {e}"));
        writer.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            writer.write_record(row).map_err(csv_err)?;
        }
        let body = writer.into_inner().map_err(|e| CliError::Other(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(args) => {
            let cfg = args.load()?;
            emit(&commands::spectrum(&cfg)?.render(&cfg)?, args.out.as_deref())
        }
        Command::ChainCoeffs(args) => {
            let cfg = args.load()?;
            emit(&commands::chain_coeffs(&cfg)?.render(&cfg)?, args.out.as_deref())
        }
        Command::Manybody(args) => {
            let cfg = args.load()?;
            emit(&commands::manybody(&cfg)?.render(&cfg)?, args.out.as_deref())
        }
        Command::Scan { common, samples } => {
            let mut cfg = common.load()?;
            if let (Some(n), Some(scan)) = (samples, cfg.scan.as_mut()) {
                scan.samples = n;
            }
            emit(&commands::scan(&cfg)?.render(&cfg)?, common.out.as_deref())
        }
        Command::Verify { common, json } => {
            let cfg = common.load()?;
            let report = verify_report(&cfg)?;
            for record in &report.checks {
                if record.verdict == Verdict::Skip {
                    eprintln!("note: {} skipped ({})", record.name, record.note);
                }
            }
            emit(&commands::verify_table(&report).render(&cfg)?, common.out.as_deref())?;
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
                emit(&text, Some(&path))?;
            }
            if report.passed {
                Ok(())
            } else {
                let failed: Vec<&str> =
                    report.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.name.as_str()).collect();
                Err(CliError::CheckFailed(failed.join(", ")))
            }
        }
    }
}
