use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use onebit::harness::{
    load_file, run_concentration, run_counterexample, run_dump, run_recover, run_rip,
    run_sweep_to_file, write_counterexample_csv, write_estimate_csv, ConcentrationConfig,
    CounterexampleConfig, DumpConfig, ExperimentConfig, RecoverConfig, RipConfig,
};
use onebit::rip::{write_concentration_csv, write_estimates_csv};
use onebit::Error;

#[derive(Parser)]
#[command(
    name = "onebit",
    version,
    about = "One-bit compressed sensing with subsampled circulant matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set trials=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load<T: DeserializeOwned>(&self) -> onebit::Result<T> {
        load_file(self.config.as_deref(), &self.overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a recovery sweep and write its CSV and plotting script.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Tabulate sign agreement of the counterexample pair.
    Counterexample {
        #[command(flatten)]
        common: Common,
    },
    /// Empirical tail frequencies of the circulant concentration statistics.
    Concentration {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate restricted isometry defects of one ensemble.
    RipEstimate {
        #[command(flatten)]
        common: Common,
    },
    /// Recover a single signal, from files or a simulated trial.
    Recover {
        #[command(flatten)]
        common: Common,
    },
    /// Sample an ensemble and write it as CSV or binary.
    DumpEnsemble {
        #[command(flatten)]
        common: Common,
    },
}

fn sink(path: Option<&Path>) -> onebit::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cmd: Command) -> onebit::Result<()> {
    match cmd {
        Command::Sweep { common, workers } => {
            let mut cfg: ExperimentConfig = common.load()?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let rows = run_sweep_to_file(&cfg)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!(
                "{} rows written to {} ({failed} failed)",
                rows.len(),
                cfg.output.display()
            );
        }
        Command::Counterexample { common } => {
            let cfg: CounterexampleConfig = common.load()?;
            let rows = run_counterexample(&cfg)?;
            let mut w = sink(cfg.output.as_deref())?;
            write_counterexample_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Concentration { common } => {
            let cfg: ConcentrationConfig = common.load()?;
            let tables = run_concentration(&cfg)?;
            let mut w = sink(cfg.output.as_deref())?;
            write_concentration_csv(&tables, &mut w)?;
            w.flush()?;
        }
        Command::RipEstimate { common } => {
            let cfg: RipConfig = common.load()?;
            let estimates = run_rip(&cfg)?;
            let mut w = sink(cfg.output.as_deref())?;
            write_estimates_csv(&estimates, u128::from(cfg.budget), &mut w)?;
            w.flush()?;
        }
        Command::Recover { common } => {
            let cfg: RecoverConfig = common.load()?;
            let result = run_recover(&cfg)?;
            let mut w = sink(cfg.output.as_deref())?;
            write_estimate_csv(&result, &mut w)?;
            w.flush()?;
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
            eprintln!(
                "method={} status={} iterations={} consistent={} l2_error={} direction_error={}",
                result.method,
                result.report.status,
                result.report.iterations,
                result.consistency_ok,
                fmt(result.l2_error),
                fmt(result.direction_error)
            );
        }
        Command::DumpEnsemble { common } => {
            let cfg: DumpConfig = common.load()?;
            let mut w = sink(cfg.output.as_deref())?;
            run_dump(&cfg, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Format(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
