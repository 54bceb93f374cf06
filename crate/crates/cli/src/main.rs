//! Command-line front end for the richness library: single-sample species
//! estimation, synthetic replicate experiments, bootstrap confidence-interval
//! coverage runs, and character-level corpus experiments.
//!
//! Exit codes: 0 on success, 1 for input or configuration problems, 2 for
//! statistical degeneracy (a sample of nothing but singletons, on which the
//! coverage-based estimators are undefined).

mod input;
mod render;
mod scenario;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use richness::estimators::EstimatorReport;
use richness::montecarlo::{
    coverage_run, generate_population, run_replicates_with, true_gamma2, ReplicateSummary,
};
use richness::rng::child_seed;
use richness::EstimatorError;

use crate::input::{normalize_text, read_frequency};
use crate::scenario::Scenario;

/// Failures carrying the documented process exit codes.
#[derive(Debug, Error)]
enum CliError {
    /// Unreadable, malformed, or inconsistent input/configuration (exit 1).
    #[error("{0}")]
    Input(String),
    /// Statistically degenerate sample (exit 2).
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Degenerate(_) => 2,
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(err: EstimatorError) -> Self {
        match err {
            EstimatorError::DegenerateAllSingletons => CliError::Degenerate(
                "statistical degeneracy: every observed species is a singleton (u = 1), \
                 so the coverage-based estimators are undefined; a larger sample is needed"
                    .to_string(),
            ),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// One species label per line.
    Tokens,
    /// Whitespace-separated species multiplicities.
    Counts,
    /// Lines of "multiplicity species-with-that-multiplicity" pairs.
    Prevalences,
    /// Free text; case-folded alphabetic characters become the tokens.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "richness",
    version,
    about = "Species-richness estimation from abundance samples",
    long_about = "Estimates the number of species in a population from one sample's \
                  abundance pattern, reconstructs the full probability vector, and \
                  replays the published simulation and confidence-interval experiments."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the species total from one observed sample.
    Estimate(EstimateArgs),
    /// Replicate-sampling experiment on a synthetic population.
    Simulate(SimulateArgs),
    /// Bootstrap confidence-interval coverage experiment.
    Ci(CiArgs),
    /// Character-level richness experiment on a text corpus.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Input file.
    #[arg(long)]
    input: PathBuf,
    /// Input layout.
    #[arg(long, value_enum, default_value_t = InputFormat::Tokens)]
    format: InputFormat,
    /// Divisor k in the Esty-style coverage correction.
    #[arg(long = "esty-k", default_value_t = 2.0)]
    esty_k: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Bundled scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Override the scenario's sample-size grid (comma-separated).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// Override the replicates per grid entry.
    #[arg(long)]
    replicates: Option<u32>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the true species count of the synthetic population.
    #[arg(long = "true-t")]
    true_t: Option<u64>,
    /// Divisor k in the Esty-style coverage correction.
    #[arg(long = "esty-k", default_value_t = 2.0)]
    esty_k: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Debug, Args)]
struct CiArgs {
    /// Bundled scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Override the per-interval sample size.
    #[arg(long)]
    n: Option<u64>,
    /// Override the confidence level.
    #[arg(long)]
    level: Option<f64>,
    /// Override the bootstrap resamples per interval.
    #[arg(long)]
    bootstrap: Option<u32>,
    /// Override the outer repeats (intervals built).
    #[arg(long)]
    replicates: Option<u32>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the true species count of the synthetic population.
    #[arg(long = "true-t")]
    true_t: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// UTF-8 text file.
    #[arg(long)]
    input: PathBuf,
    /// Characters drawn per replicate sample.
    #[arg(long)]
    n: u64,
    /// Replicate samples to draw.
    #[arg(long, default_value_t = 1000)]
    replicates: u32,
    #[arg(long, default_value_t = 9)]
    seed: u64,
    /// Ground-truth alphabet size for the error columns (defaults to the
    /// distinct letters of the normalized text).
    #[arg(long = "true-t")]
    true_t: Option<u64>,
    /// Restrict to an explicit alphabet after case folding.
    #[arg(long)]
    charset: Option<String>,
    /// Divisor k in the Esty-style coverage correction.
    #[arg(long = "esty-k", default_value_t = 2.0)]
    esty_k: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                // --help/--version are successful outcomes, not usage errors.
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Ci(args) => cmd_ci(args),
        Command::Corpus(args) => cmd_corpus(args),
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    if !args.esty_k.is_finite() || args.esty_k <= 0.0 {
        return Err(CliError::Input(format!(
            "--esty-k must be a positive number, got {}",
            args.esty_k
        )));
    }
    let freq = read_frequency(&args.input, args.format)?;
    let report = EstimatorReport::compute(&freq, args.esty_k)?;
    let flat = render::flat_report(&freq, &report);
    print!("{}", render::flat_output(&flat, args.output));
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (label, mut scenario) = Scenario::resolve(&args.scenario)?;
    if let Some(n) = args.n {
        scenario.n = n;
    }
    if let Some(replicates) = args.replicates {
        scenario.replicates = replicates;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(t) = args.true_t {
        scenario.t = t;
    }
    scenario.validate()?;
    if !args.esty_k.is_finite() || args.esty_k <= 0.0 {
        return Err(CliError::Input(format!(
            "--esty-k must be a positive number, got {}",
            args.esty_k
        )));
    }

    let probs = generate_population(&scenario.population());
    let gamma2 = true_gamma2(&probs);
    // Each grid entry gets its own replicate stream so rows stay
    // independent of their position in the grid.
    let rows: Vec<ReplicateSummary> = scenario
        .n
        .iter()
        .map(|&n| {
            run_replicates_with(
                &probs,
                n,
                scenario.replicates,
                child_seed(scenario.seed, n),
                args.esty_k,
            )
        })
        .collect();

    print!(
        "{}",
        render::simulate_output(&label, &scenario, gamma2, &rows, args.output)
    );
    Ok(())
}

fn cmd_ci(args: CiArgs) -> Result<(), CliError> {
    let (label, mut scenario) = Scenario::resolve(&args.scenario)?;
    if let Some(n) = args.n {
        scenario.n = vec![n];
    }
    if let Some(level) = args.level {
        scenario.level = level;
    }
    if let Some(bootstrap) = args.bootstrap {
        scenario.bootstrap = bootstrap;
    }
    if let Some(repeats) = args.replicates {
        scenario.replicates = repeats;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(t) = args.true_t {
        scenario.t = t;
    }
    scenario.validate()?;
    let n = scenario.n[0];

    let probs = generate_population(&scenario.population());
    let gamma2 = true_gamma2(&probs);
    let run = coverage_run(
        &probs,
        n,
        scenario.level,
        scenario.bootstrap,
        scenario.replicates,
        scenario.seed,
    );

    print!(
        "{}",
        render::ci_output(&label, &scenario, gamma2, n, &run, args.output)
    );
    Ok(())
}

fn cmd_corpus(args: CorpusArgs) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::Input(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    if args.replicates == 0 {
        return Err(CliError::Input(
            "--replicates must be at least 1".to_string(),
        ));
    }
    if !args.esty_k.is_finite() || args.esty_k <= 0.0 {
        return Err(CliError::Input(format!(
            "--esty-k must be a positive number, got {}",
            args.esty_k
        )));
    }
    let text = fs::read_to_string(&args.input)
        .map_err(|err| CliError::Input(format!("cannot read {}: {err}", args.input.display())))?;
    let letters = normalize_text(&text, args.charset.as_deref());
    if letters.is_empty() {
        return Err(CliError::Input(format!(
            "no letters remain after normalizing {}; nothing to sample",
            args.input.display()
        )));
    }

    let mut tallies: BTreeMap<char, u64> = BTreeMap::new();
    for c in &letters {
        *tallies.entry(*c).or_insert(0) += 1;
    }
    let total = letters.len() as f64;
    let probs: Vec<f64> = tallies.values().map(|&c| c as f64 / total).collect();
    let distinct = probs.len() as u64;
    let true_t = args.true_t.unwrap_or(distinct);

    let summary = run_replicates_with(&probs, args.n, args.replicates, args.seed, args.esty_k);
    print!(
        "{}",
        render::corpus_output(
            &args.input.display().to_string(),
            distinct,
            true_t,
            true_gamma2(&probs),
            args.seed,
            &summary,
            args.output,
        )
    );
    Ok(())
}
