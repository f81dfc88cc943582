use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use segre_cli::config::parse_tolerance;
use segre_cli::{run_suite, CliError, RunConfig};
use segre_core::numkit::scalar::Precision;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

/// Runs the verification suites and reports pass/fail per assertion.
#[derive(Debug, Parser)]
#[command(name = "segre-verify", version)]
struct Args {
    /// Suite to run, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = segre_cli::config::DEFAULT_SEED)]
    seed: u64,
    /// Trial count of the sampling suites.
    #[arg(long)]
    trials: Option<usize>,
    /// Tolerance override KEY=VAL; keys: plucker, invariant, orbit-margin, pencil-ratio.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    tol: Vec<String>,
    #[arg(long, value_enum, default_value = "double")]
    precision: PrecisionArg,
    /// Writes the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Source points of P^3, one per line as fractions, for the six-lines suite.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Also runs the monodromy count.
    #[arg(long)]
    long: bool,
}

fn config(args: &Args) -> Result<RunConfig, CliError> {
    let mut overrides = BTreeMap::new();
    for t in &args.tol {
        let (k, v) = parse_tolerance(t)?;
        overrides.insert(k, v);
    }
    Ok(RunConfig {
        suite: args.suite.clone(),
        seed: args.seed,
        trials: args.trials,
        tolerance_overrides: overrides,
        precision: match args.precision {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        },
        fixtures: args.fixtures.clone(),
        json: args.json.clone(),
        long: args.long,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let run = || -> Result<bool, CliError> {
        let cfg = config(&args)?;
        let report = run_suite(&cfg.suite, &cfg)?;
        print!("{}", report.summary());
        if let Some(path) = &cfg.json {
            std::fs::write(path, report.to_json() + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(report.pass)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
