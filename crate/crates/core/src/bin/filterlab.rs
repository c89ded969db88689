//! Command-line driver for twin-filter experiments.
//!
//! Exit codes: 0 success, 1 config error, 2 degenerate update, 3 failed
//! assumption checks, 4 any other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use filterlab::experiment::{load_trace, run_experiment, DistanceName, ExperimentConfig, MethodName, Overrides};
use filterlab::models::{assumption_report, Preset};
use filterlab::stability::{estimate_rate, tail_window};
use filterlab::Error;

#[derive(Parser)]
#[command(name = "filterlab", version, about = "Forgetting of the initial condition in nonlinear filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run twin filters and write trace_<seed>.csv and summary.json.
    Run(RunArgs),
    /// Print one line per assumption check; exit 0 iff all pass.
    CheckAssumptions(ModelArgs),
    /// Fit and classify the decay rate of a trace CSV.
    Rate {
        trace: PathBuf,
        /// Column to fit: bl or tv. Defaults to bl when present.
        #[arg(long)]
        column: Option<DistanceName>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Named preset (static-gaussian, ar-random-walk, ar-contracting, counterexample-blind).
    #[arg(long)]
    preset: Option<Preset>,
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// grid, particle or kalman-static.
    #[arg(long)]
    method: Option<MethodName>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of bl,tv.
    #[arg(long, value_delimiter = ',')]
    distances: Option<Vec<DistanceName>>,
}

fn load_config(args: &ModelArgs) -> filterlab::Result<ExperimentConfig> {
    match (&args.config, args.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path),
        (None, Some(_)) => Ok(ExperimentConfig::default()),
        (None, None) => Err(Error::Config("pass --preset or --config".into())),
    }
}

fn run(args: RunArgs) -> filterlab::Result<ExitCode> {
    let overrides = Overrides {
        preset: args.model.preset,
        horizon: args.horizon,
        seeds: args.seeds.or(args.seed.map(|s| vec![s])),
        method: args.method,
        out: args.out,
        distances: args.distances,
    };
    let exp = load_config(&args.model)?.resolve(overrides)?;
    let output = run_experiment(&exp)?;
    let s = &output.summary;
    println!(
        "{}: {} seed(s), horizon {}, artifacts in {}",
        s.preset,
        s.seeds.len(),
        exp.horizon,
        exp.out.display()
    );
    if let (Some(slope), Some(class)) = (s.rate_slope, &s.rate_class) {
        println!("rate: {class} (log-log slope {slope:.4})");
    }
    Ok(ExitCode::SUCCESS)
}

fn check(args: ModelArgs) -> filterlab::Result<ExitCode> {
    let exp = load_config(&args)?.resolve(Overrides {
        preset: args.preset,
        ..Default::default()
    })?;
    let reports = assumption_report(&exp.spec);
    for r in &reports {
        println!("{}", r.line());
    }
    Ok(if reports.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn rate(path: &Path, column: Option<DistanceName>) -> filterlab::Result<ExitCode> {
    let rows = load_trace(path)?;
    let has_bl = rows.iter().any(|r| r.bl.is_some());
    let column = column.unwrap_or(if has_bl { DistanceName::Bl } else { DistanceName::Tv });
    let values: Vec<f64> = rows
        .iter()
        .map(|r| match column {
            DistanceName::Bl => r.bl,
            DistanceName::Tv => r.tv,
        })
        .map(|v| v.unwrap_or(f64::NAN))
        .collect();
    if values.is_empty() {
        return Err(Error::TooFewPoints { usable: 0 });
    }
    let fit = estimate_rate(&values, tail_window(values.len()))?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::CheckAssumptions(args) => check(args),
        Command::Rate { trace, column } => rate(&trace, column),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match &e {
                Error::Config(_) => 1,
                e if e.is_degenerate() => 2,
                _ => 4,
            })
        }
    }
}
