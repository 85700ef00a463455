use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsesplit::stream_io::{write_dataset, DatasetHeader};
use sparsesplit::{generate, GenConfig};
use sparsesplit_cli::{
    run_experiment, sweep, verify, write_rows, Algorithm, CliError, Clock, RunConfig, Source,
    SweepAxis, SweepConfig, VerifyConfig, EXIT_ERROR, EXIT_VIOLATION,
};

#[derive(Parser)]
#[command(
    name = "sparsesplit",
    version,
    about = "Streaming split selection on sparse binary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset in sparse text format.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replay a stream through one engine and write per-update metrics as CSV.
    Run(RunArgs),
    /// Average running time and tree counts over a parameter grid.
    Sweep(SweepArgs),
    /// Check engine invariants and the approximation bound after every update.
    Verify {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d1: usize,
        #[arg(long, default_value_t = 300)]
        d2: usize,
        #[arg(long, default_value_t = 0.02)]
        q: f64,
        /// First seed; consecutive seeds follow.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.1, 1.0, 5.0])]
        alphas: Vec<f64>,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Informative features.
    #[arg(long, default_value_t = 10)]
    d1: usize,
    /// Noise features.
    #[arg(long, default_value_t = 10_000)]
    d2: usize,
    /// Noise density.
    #[arg(long, default_value_t = 0.001)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GenArgs {
    fn config(&self) -> GenConfig {
        GenConfig {
            n: self.n,
            d1: self.d1,
            d2: self.d2,
            q: self.q,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Dataset file; a generated stream is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long, value_enum, default_value_t = Algorithm::UpdEnt)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Compare every answer with the exact optimum.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 1)]
    report_every: usize,
    #[arg(long, value_enum, default_value_t = Clock::Monotonic)]
    clock: Clock,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: SweepAxis,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = Algorithm::ALL)]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Expected noise ones per point on the `dim` axis.
    #[arg(long, default_value_t = 10.0)]
    noise_per_point: f64,
    #[arg(long, value_enum, default_value_t = Clock::Monotonic)]
    clock: Clock,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Io {
                context: p.display().to_string(),
                source: e,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(context: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        context: context.to_string(),
        source,
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Gen { gen, output } => {
            let cfg = gen.config();
            let data = generate(&cfg)?;
            let mut out = sink(output.as_deref())?;
            write_dataset(&mut out, &data.points, &DatasetHeader::for_generator(&cfg))
                .and_then(|_| out.flush())
                .map_err(io_err("writing dataset"))?;
            Ok(0)
        }
        Command::Run(args) => {
            let source = match args.input {
                Some(path) => Source::File(path),
                None => Source::Generated(args.gen.config()),
            };
            let config = RunConfig {
                source,
                algorithm: args.algorithm,
                alpha: args.alpha,
                oracle: args.oracle,
                report_every: args.report_every,
                clock: args.clock,
            };
            config.validate()?;
            let points = config.source.load()?;
            let report = run_experiment(&config, &points)?;
            write_rows(sink(args.output.as_deref())?, &report.rows)?;
            if report.violations > 0 {
                eprintln!(
                    "guarantee violated on {} of {} updates",
                    report.violations, report.updates
                );
                return Ok(EXIT_VIOLATION);
            }
            Ok(0)
        }
        Command::Sweep(args) => {
            let config = SweepConfig {
                axis: args.axis,
                values: args.values,
                algorithms: args.algorithms,
                repeats: args.repeats,
                seed: args.gen.seed,
                base: args.gen.config(),
                alpha: args.alpha,
                noise_per_point: args.noise_per_point,
                clock: args.clock,
                threads: args.threads,
            };
            let rows = sweep(&config)?;
            write_rows(sink(args.output.as_deref())?, &rows)?;
            Ok(0)
        }
        Command::Verify {
            n,
            d1,
            d2,
            q,
            seed,
            seeds,
            alphas,
        } => {
            let report = verify(&VerifyConfig {
                base: GenConfig { n, d1, d2, q, seed },
                seeds,
                alphas,
            })?;
            for msg in report
                .invariant_failures
                .iter()
                .chain(&report.guarantee_failures)
            {
                eprintln!("{msg}");
            }
            println!(
                "{} updates checked, {} invariant failures, {} guarantee failures",
                report.updates,
                report.invariant_failures.len(),
                report.guarantee_failures.len()
            );
            Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
