use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nads_cli::scenario::Output;
use nads_cli::{load_scenario, validate, Axis, CliError, Reduce, Scenario, Table};

#[derive(Parser)]
#[command(
    name = "nads",
    version,
    about = "Nonadiabatic dressed states of a driven, damped two-level system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dressed-state quantities, overlaps and P at every grid point
    Snapshot {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the bare-basis amplitudes
    Evolve {
        file: PathBuf,
        /// Add amplitude ratios from the integrator and the dressed states
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a scenario to one scalar over a grid of parameter values
    Sweep {
        file: PathBuf,
        /// path:min:max:count[:log], given once or twice
        #[arg(long, required = true)]
        axis: Vec<String>,
        /// maxP, finalP, finalPe, finalNorm or maxAbsEg
        #[arg(long)]
        reduce: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite
    Validate {
        #[arg(long)]
        json: bool,
    },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// A closed pipe (`nads ... | head`) is not an error.
fn to_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

/// CSV to `out` (stdout when absent), plus a JSON mirror next to it when the
/// scenario asks for one.
fn emit(table: &Table, scenario: &Scenario, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if scenario.outputs.contains(&Output::Csv) || !scenario.outputs.contains(&Output::Json) {
                write(path, &table.to_csv())?;
            }
            if scenario.outputs.contains(&Output::Json) {
                write(&path.with_extension("json"), &table.to_json())?;
            }
        }
        None => to_stdout(&table.to_csv())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Snapshot { file, out } => {
            let s = load_scenario(&file)?;
            emit(&nads_cli::snapshot_table(&s)?, &s, out.as_deref())
        }
        Command::Evolve { file, compare, out } => {
            let s = load_scenario(&file)?;
            emit(&nads_cli::evolve_table(&s, compare)?, &s, out.as_deref())
        }
        Command::Sweep {
            file,
            axis,
            reduce,
            out,
        } => {
            let s = load_scenario(&file)?;
            let axes = axis.iter().map(|a| a.parse()).collect::<Result<Vec<Axis>, _>>()?;
            let reduce: Reduce = reduce.parse()?;
            let table = nads_cli::sweep_table(&s, &axes, reduce, nads_cli::worker_count())?;
            emit(&table, &s, out.as_deref())
        }
        Command::Validate { json } => {
            let report = validate::run();
            if json {
                to_stdout(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
            } else {
                to_stdout(&report.to_text())?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::ChecksFailed(report.failed()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
