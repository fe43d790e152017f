//! Command-line front end. Every command reads one JSON config, runs the
//! library and writes a JSON report (schema-versioned, with the config
//! echoed) or a CSV table.
//!
//! Exit codes: 0 success, 2 invalid input, 3 model condition without a
//! closed form (the report is still written).

mod commands;
mod config;

pub use commands::*;
pub use config::*;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::Strategy;
use crate::netsim::Backend;
use crate::optimizer::Method;

#[derive(Debug, Parser)]
#[command(
    name = "onoc-fcnn",
    version,
    about = "Plan, map and simulate FCNN training on a ring optical NoC"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Replace existing output files.
    #[arg(long)]
    pub force: bool,
    /// Recorded in the report; the commands themselves are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and exhaustive core allocation.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Neuron-to-core mapping and its analyses.
    Map {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// One training epoch on the chosen network.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Also write the wavelength matrices as CSV.
        #[arg(long, value_name = "PATH")]
        wavelengths: Option<PathBuf>,
    },
    /// Optimal allocations against FGP and FNP, on ONoC and ENoC.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long)]
        fnp_cores: Option<u64>,
    },
    /// Cost over a range of core counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Period to sweep; all periods when omitted.
        #[arg(long)]
        period: Option<usize>,
        /// Inclusive range `FROM:TO`; defaults to `1:m`.
        #[arg(long, value_name = "FROM:TO")]
        range: Option<String>,
    },
    /// Print a complete config with every default.
    Defaults {
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Fm,
    Rrm,
    Orrm,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Fm => Strategy::Fm,
            StrategyArg::Rrm => Strategy::Rrm,
            StrategyArg::Orrm => Strategy::Orrm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Onoc,
    Enoc,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Onoc => Backend::Onoc,
            BackendArg::Enoc => Backend::Enoc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Closed,
    Brute,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => Method::ClosedForm,
            MethodArg::Brute => Method::BruteForce,
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unsupported(_) => 3,
        Error::Invalid { .. } | Error::Io { .. } => 2,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Output destinations of one command, checked up front so nothing is
/// written when any target would be clobbered.
struct Sink {
    targets: Vec<Option<PathBuf>>,
}

impl Sink {
    fn new(targets: Vec<Option<PathBuf>>, force: bool) -> Result<Self> {
        let paths: Vec<&PathBuf> = targets.iter().flatten().collect();
        for (k, p) in paths.iter().enumerate() {
            if paths[..k].contains(p) {
                return Err(Error::invalid(
                    "--out",
                    format!("{} is used for two outputs", p.display()),
                ));
            }
            if p.exists() && !force {
                return Err(Error::invalid(
                    "--out",
                    format!("{} exists; pass --force to overwrite", p.display()),
                ));
            }
        }
        Ok(Sink { targets })
    }

    fn write(&self, slot: usize, body: &str) -> Result<()> {
        match &self.targets[slot] {
            Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
            None => std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| io_err(Path::new("<stdout>"), e)),
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn parse_range(text: &str) -> Result<(u64, u64)> {
    let bad = || Error::invalid("--range", format!("expected FROM:TO, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn load(common: &Common) -> Result<(Prepared, Sink)> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.run.out = Some(out.clone());
    }
    let prep = cfg.prepare()?;
    let sink = Sink::new(vec![prep.config.run.out.clone()], common.force)?;
    Ok((prep, sink))
}

/// Runs one parsed command line. `Err` carries the error to report; a
/// deferred condition (see module docs) comes back as `Ok(Some(_))` after
/// the report has been written.
pub fn execute(cli: Cli) -> Result<Option<Error>> {
    match cli.command {
        Command::Defaults { out, force } => {
            let sink = Sink::new(vec![out], force)?;
            sink.write(0, &json(&RunConfig::example()))?;
            Ok(None)
        }
        Command::Plan { common, method } => {
            let (mut prep, sink) = load(&common)?;
            if let Some(m) = method {
                prep.config.run.method = m.into();
            }
            let r = plan(&prep, prep.config.run.method, common.seed)?;
            let body = match common.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv(&prep)?,
            };
            sink.write(0, &body)?;
            Ok(None)
        }
        Command::Map {
            common,
            strategy,
            method,
        } => {
            let (mut prep, sink) = load(&common)?;
            if let Some(s) = strategy {
                prep.config.run.strategy = s.into();
            }
            if let Some(m) = method {
                prep.config.run.method = m.into();
            }
            let run = &prep.config.run;
            let r = map_report(&prep, run.strategy, run.method, common.seed)?;
            let body = match common.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv(),
            };
            sink.write(0, &body)?;
            Ok(r.analysis.memory_note.clone().map(Error::Unsupported))
        }
        Command::Simulate {
            common,
            strategy,
            backend,
            method,
            wavelengths,
        } => {
            let mut cfg = RunConfig::load(&common.config)?;
            if let Some(out) = &common.out {
                cfg.run.out = Some(out.clone());
            }
            if let Some(w) = wavelengths {
                cfg.run.wavelengths_out = Some(w);
            }
            if let Some(s) = strategy {
                cfg.run.strategy = s.into();
            }
            if let Some(b) = backend {
                cfg.run.backend = b.into();
            }
            if let Some(m) = method {
                cfg.run.method = m.into();
            }
            let prep = cfg.prepare()?;
            let run = &prep.config.run;
            let sink = Sink::new(
                vec![run.out.clone(), run.wavelengths_out.clone()],
                common.force,
            )?;
            let r = simulate(&prep, run.strategy, run.backend, run.method, common.seed)?;
            let body = match common.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv()?,
            };
            sink.write(0, &body)?;
            if run.wavelengths_out.is_some() {
                sink.write(1, &r.wavelengths_csv()?)?;
            }
            Ok(None)
        }
        Command::Compare {
            common,
            strategy,
            fnp_cores,
        } => {
            let (mut prep, sink) = load(&common)?;
            if let Some(s) = strategy {
                prep.config.run.strategy = s.into();
            }
            if let Some(n) = fnp_cores {
                prep.config.run.fnp_cores = n;
            }
            let r = compare(
                &prep,
                prep.config.run.strategy,
                prep.config.run.fnp_cores,
                common.seed,
            )?;
            let body = match common.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv()?,
            };
            sink.write(0, &body)?;
            Ok(None)
        }
        Command::Sweep {
            common,
            period,
            range,
        } => {
            let (prep, sink) = load(&common)?;
            let (lo, hi) = match range {
                Some(text) => parse_range(&text)?,
                None => (1, prep.config.onoc.m),
            };
            let r = sweep(&prep, period, lo, hi, common.seed)?;
            let body = match common.format {
                Format::Json => json(&r),
                Format::Csv => r.to_csv()?,
            };
            sink.write(0, &body)?;
            Ok(None)
        }
    }
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code, printing diagnostics to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:1").unwrap(), (1, 1));
        assert_eq!(parse_range(" 3 : 40 ").unwrap(), (3, 40));
        assert!(parse_range("5").is_err());
        assert!(parse_range("a:2").is_err());
    }

    #[test]
    fn unknown_strategy_is_usage_error() {
        let e = Cli::try_parse_from(["onoc-fcnn", "map", "--config", "x.json", "--strategy", "zz"])
            .unwrap_err();
        assert_eq!(e.kind(), clap::error::ErrorKind::InvalidValue);
    }

    #[test]
    fn codes() {
        assert_eq!(exit_code(&Error::invalid("onoc.phi", "x")), 2);
        assert_eq!(exit_code(&Error::Unsupported("x".into())), 3);
    }
}
