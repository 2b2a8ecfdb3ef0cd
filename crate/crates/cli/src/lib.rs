//! `risemass`: mass towers and verification suites from the command line.
//!
//! Exit codes: 0 when every asserted residual passes, 1 on an assertion
//! failure, 2 on a configuration error. Data goes to stdout or the configured
//! files, diagnostics to stderr.

pub mod config;
pub mod error;
pub mod format;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    resolve, BasisFile, CheckFile, Command, FileConfig, GridFile, ModelFile, OutputFile, RunConfig, Suite,
};
pub use crate::error::CliError;
use crate::report::{tower_csv, Report, StoredReport, SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "risemass", version, about = "Rising mass spectrum: towers and operator identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Mass-squared tower of the truncated basis as CSV, with a JSON report.
    Tower(Overrides),
    /// Run one verification suite and emit a JSON report.
    Check {
        /// so3, rotation-invariance, fw-equivalence, spin-project, dirac-reduce, k13, laplacian or sixdim.
        suite: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rerun a stored report from its echoed config and compare.
    Report {
        #[arg(long, value_name = "JSON")]
        replay: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    /// TOML file with [model], [basis], [grid], [check] and [output] sections.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    l_max: Option<u32>,
    #[arg(long)]
    spin_dim: Option<usize>,
    /// orbital-only or dirac-spin.
    #[arg(long)]
    spin_mode: Option<String>,
    /// External momentum as px,py,pz.
    #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
    p: Option<Vec<f64>>,
    /// Grid points per axis (power of two).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_max: Option<f64>,
    /// pointwise or dealiased.
    #[arg(long)]
    multiplier: Option<String>,
    /// k13 only: also run at 2n and require each family to improve.
    #[arg(long)]
    convergence: bool,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    csv: Option<String>,
    #[arg(long, value_name = "PATH")]
    json: Option<String>,
    /// Record wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl Overrides {
    fn into_parts(self) -> Result<(Option<PathBuf>, FileConfig), CliError> {
        let p = match self.p {
            None => None,
            Some(v) => Some(<[f64; 3]>::try_from(v).map_err(|_| CliError::Config("--p takes three values".into()))?),
        };
        let flags = FileConfig {
            model: ModelFile {
                m: self.m,
                r0: self.r0,
                a: self.a,
                b: self.b,
            },
            basis: BasisFile {
                l_max: self.l_max,
                spin_dim: self.spin_dim,
                spin_mode: self.spin_mode,
                p,
            },
            grid: GridFile {
                n: self.n,
                k_max: self.k_max,
                multiplier: self.multiplier,
                convergence: self.convergence.then_some(true),
            },
            check: CheckFile {
                tolerance: self.tolerance,
                samples: self.samples,
                seed: self.seed,
            },
            output: OutputFile {
                csv: self.csv,
                json: self.json,
                timing: self.timing.then_some(true),
            },
        };
        Ok((self.config, flags))
    }

    fn resolve(self, command: Command, suite: Option<Suite>) -> Result<RunConfig, CliError> {
        let (path, flags) = self.into_parts()?;
        let file = match path {
            Some(p) => FileConfig::load(&p)?,
            None => FileConfig::default(),
        };
        resolve(command, suite, file, flags)
    }
}

/// Rendered outputs of one run; `csv` only for `tower`.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

/// Runs a resolved config without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (tower, csv, results) = match cfg.command {
        Command::Tower => {
            let (rows, results) = suites::tower(cfg)?;
            let csv = tower_csv(&rows);
            (Some(rows), Some(csv), results)
        }
        Command::Check => {
            let suite = cfg.suite.ok_or_else(|| CliError::Config("check needs a suite".into()))?;
            (None, None, suites::check(cfg, suite)?)
        }
    };
    let mut report = Report::new(cfg.clone(), tower, results);
    if cfg.output.timing {
        report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(Outcome { report, csv })
}

fn write_file(path: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn emit_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        })
}

/// CSV goes to `output.csv` or stdout; JSON goes to `output.json`, or to stdout
/// when stdout is not already taken by the CSV.
fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let json = outcome.report.to_json();
    let mut stdout_used = false;
    if let Some(csv) = &outcome.csv {
        match &cfg.output.csv {
            Some(path) => write_file(path, csv)?,
            None => {
                emit_stdout(csv)?;
                stdout_used = true;
            }
        }
    }
    match &cfg.output.json {
        Some(path) => write_file(path, &json)?,
        None if !stdout_used => emit_stdout(&json)?,
        None => {}
    }
    Ok(())
}

fn exit_for(report: &Report) -> i32 {
    if report.passed() {
        0
    } else {
        for r in report.results.iter().filter(|r| r.failed()) {
            eprintln!("FAIL {}: relative {:.3e} vs tolerance {:.1e}", r.name, r.relative, r.tolerance);
        }
        1
    }
}

fn replay(path: &Path) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stored: StoredReport = serde_json::from_str(&text)?;
    if stored.schema != SCHEMA {
        return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA})", stored.schema)));
    }
    stored.config.validate()?;
    let outcome = execute(&stored.config)?;
    let fresh = outcome.report.to_json();
    emit_stdout(&fresh)?;
    let normalise = |s: &str| -> Result<serde_json::Value, CliError> {
        let mut v: serde_json::Value = serde_json::from_str(s)?;
        if let Some(obj) = v.as_object_mut() {
            obj.insert("wall_clock_s".into(), serde_json::Value::Null);
        }
        Ok(v)
    };
    let (old, new) = (normalise(&text)?, normalise(&fresh)?);
    if old != new {
        let field = ["config", "tower", "results", "summary"]
            .into_iter()
            .find(|k| old.get(k) != new.get(k))
            .unwrap_or("top level");
        return Err(CliError::ReplayMismatch(format!("'{field}' differs")));
    }
    Ok(exit_for(&outcome.report))
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (command, suite, overrides) = match cli.command {
        Verb::Tower(o) => (Command::Tower, None, o),
        Verb::Check { suite, overrides } => (Command::Check, Some(suite.parse::<Suite>()?), overrides),
        Verb::Report { replay: path } => return replay(&path),
    };
    let cfg = overrides.resolve(command, suite)?;
    let outcome = execute(&cfg)?;
    emit(&cfg, &outcome)?;
    Ok(exit_for(&outcome.report))
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("risemass: {e}");
            e.exit_code()
        }
    }
}
