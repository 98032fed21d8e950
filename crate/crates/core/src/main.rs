use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rpkm::bench::{run_experiment, summarize, Algorithm, DataSource, ExperimentConfig, GroupKey};
use rpkm::data::{
    generate_mixture, read_run_records, write_dataset_csv, write_records_csv, JsonLinesSink,
    MixtureSpec,
};
use rpkm::WLParams;

/// Grid-based recursive partition K-means and its benchmark harness.
#[derive(Debug, Parser)]
#[command(name = "rpkm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded Gaussian mixture as CSV.
    Generate(GenerateArgs),
    /// Run an experiment sweep and write one record per run.
    Run(RunArgs),
    /// Median and quartile tables from a records file.
    Summarize(SummarizeArgs),
}

#[derive(Debug, Args)]
struct MixtureArgs {
    /// Standard deviation of each component.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Minimum distance between component means, in units of sigma.
    #[arg(long, default_value_t = 4.0)]
    min_separation: f64,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Number of mixture components.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    mixture: MixtureArgs,
    /// Append the generating component of each point.
    #[arg(long)]
    labels: bool,
    /// Output file; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Algorithms to run: rpkm, kmpp, mb.
    #[arg(long, value_delimiter = ',', default_value = "rpkm,kmpp,mb")]
    algorithms: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// RPKM depth (number of grid levels).
    #[arg(long, default_value_t = 6)]
    m: u32,
    /// Minibatch sizes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    b: Vec<usize>,
    /// Minibatch batch count.
    #[arg(long, default_value_t = 100)]
    t: usize,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Base seed; every dataset and run seed is derived from it.
    #[arg(long)]
    seed: u64,
    /// Compute the full error and std.error after every RPKM step.
    #[arg(long)]
    evaluate: bool,
    /// Stop RPKM once no centroid moves more than this (squared); 0 disables.
    #[arg(long, default_value_t = 0.0)]
    displacement_threshold: f64,
    /// Relative error improvement below which weighted Lloyd stops.
    #[arg(long, default_value_t = 1e-9)]
    wl_tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    wl_max_iterations: usize,
    /// Sample rows and columns of this CSV file instead of generating mixtures.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    mixture: MixtureArgs,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Record wall-clock times (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    /// Attach clustering-repeat and iteration-bound checks to RPKM records.
    #[arg(long)]
    theory_checks: bool,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Output file; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    /// JSON-Lines records written by `run`.
    input: PathBuf,
    /// Grouping keys: algorithm, n, d, k, b, step.
    #[arg(long, value_delimiter = ',', default_value = "algorithm")]
    group_by: Vec<String>,
    /// Output file; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Partial(usize),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut spec = MixtureSpec::new(args.n, args.d, args.k, args.seed).with_sigma(args.mixture.sigma);
    spec.min_separation_sigmas = args.mixture.min_separation;
    let (data, labels) = generate_mixture(&spec)?;
    let mut out = open_output(&args.output)?;
    write_dataset_csv(&data, args.labels.then_some(labels.as_slice()), &mut out)?;
    out.flush()?;
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let algorithms = args
        .algorithms
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = ExperimentConfig {
        algorithms,
        n_list: args.n,
        d_list: args.d,
        k_list: args.k,
        m: args.m,
        b_list: args.b,
        t: args.t,
        replicates: args.replicates,
        seed: args.seed,
        evaluate: args.evaluate,
        displacement_threshold: args.displacement_threshold,
        wl: WLParams {
            rel_tolerance: args.wl_tolerance,
            max_iterations: args.wl_max_iterations,
            keep_history: false,
        },
        source: match args.csv {
            Some(path) => DataSource::Csv(path),
            None => DataSource::Mixture {
                sigma: args.mixture.sigma,
                min_separation_sigmas: args.mixture.min_separation,
            },
        },
        jobs: args.jobs,
        timing: args.timing,
        theory_checks: args.theory_checks,
    };
    let records = run_experiment(&config)?;
    let out = open_output(&args.output)?;
    match args.format {
        Format::Jsonl => {
            let mut sink = JsonLinesSink::new(out, args.output.unwrap_or_else(|| "<stdout>".into()));
            for r in &records {
                sink.write(r)?;
            }
            sink.finish()?.flush()?;
        }
        Format::Csv => {
            let mut out = out;
            write_records_csv(&records, &mut out)?;
            out.flush()?;
        }
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} n={} d={} K={} replicate {} failed: {}",
            r.algorithm,
            r.n,
            r.d,
            r.k,
            r.params.replicate,
            r.error.as_deref().unwrap_or_default()
        );
    }
    if failed > 0 {
        return Err(Failure::Partial(failed));
    }
    Ok(())
}

fn summarize_cmd(args: SummarizeArgs) -> Result<(), Failure> {
    let keys = args
        .group_by
        .iter()
        .map(|k| k.parse::<GroupKey>())
        .collect::<Result<Vec<_>, _>>()?;
    let records = read_run_records(&args.input)?;
    let summary = summarize(&records, &keys);
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = open_output(&args.output)?;
    summary.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Summarize(a) => summarize_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Partial(n)) => {
            eprintln!("error: {n} run(s) failed; see the error fields of their records");
            ExitCode::from(2)
        }
    }
}
