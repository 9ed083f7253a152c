//! Command-line front end for the rsthp simulator.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rsthp::channel::{ErrorModel, SystemConfig};
use rsthp::error::Error;
use rsthp::flops::{count_to_f64, count_to_string, flops_scheme, FlopsModel, FlopsScheme};
use rsthp::harness::{
    run_benchmark, run_experiment, scaled_error_spec, sweep_delta, to_csv, to_json,
    ExperimentSpec, ResultRow,
};
use rsthp::scheme::SchemeSpec;

#[derive(Parser)]
#[command(
    name = "rsthp",
    version,
    about = "Rate-splitting + Tomlinson-Harashima precoding link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        /// Path to the experiment file.
        #[arg(long)]
        config: PathBuf,
        /// Override the seed from the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the Monte-Carlo loop (default: all cores).
        #[arg(long)]
        parallel: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print floating-point operation counts per frame.
    Flops {
        /// Transmit antennas (= total receive antennas).
        #[arg(long, default_value_t = 12)]
        n: i64,
        /// Number of users.
        #[arg(long, default_value_t = 6)]
        k: i64,
        /// Scheme id (e.g. RS-ZF-dTHP-MMSEc); omit to list all.
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Sweep the common-stream power fraction for one RS scheme.
    SweepDelta {
        /// RS scheme id.
        #[arg(long)]
        scheme: String,
        /// Operating SNR in dB.
        #[arg(long, default_value_t = 20.0)]
        snr: f64,
        /// CSIT error variance.
        #[arg(long, default_value_t = 0.05)]
        sigma_e2: f64,
        /// Number of grid points over [0, 1].
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Monte-Carlo channels.
        #[arg(long, default_value_t = 50)]
        channels: usize,
        /// Error draws per channel.
        #[arg(long, default_value_t = 50)]
        errors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        parallel: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the six-scheme ergodic sum-rate benchmark at 20 dB.
    Benchmark {
        /// Monte-Carlo channels.
        #[arg(long, default_value_t = 100)]
        channels: usize,
        /// Error draws per channel.
        #[arg(long, default_value_t = 100)]
        errors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        parallel: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the SNR-scaled error sweep for the RS-THP schemes.
    ScaledSweep {
        #[arg(long, default_value_t = 100)]
        channels: usize,
        #[arg(long, default_value_t = 100)]
        errors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        parallel: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn configure_threads(parallel: Option<usize>) -> Result<(), Error> {
    if let Some(n) = parallel {
        if n == 0 {
            return Err(Error::Config("--parallel must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(rows: &[ResultRow], output: &OutputArgs) -> Result<(), Error> {
    let text = match output.format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows)?,
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn flops_table(n: i64, k: i64, scheme: Option<&str>) -> Result<(), Error> {
    let schemes = match scheme {
        Some(id) => vec![FlopsScheme::parse(id)?],
        None => FlopsScheme::all(),
    };
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "scheme,n,k,flops,flops_exact")?;
    for s in schemes {
        let count = flops_scheme(FlopsModel::new(s, n, k)?);
        writeln!(
            stdout,
            "{},{},{},{},{}",
            s,
            n,
            k,
            count_to_f64(count),
            count_to_string(count)
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, seed, parallel, output } => {
            configure_threads(parallel)?;
            let mut spec = ExperimentSpec::from_path(&config)?;
            if let Some(s) = seed {
                spec.system.seed = s;
            }
            let rows = run_experiment(&spec)?;
            // --out wins over the file's output_path; stdout if neither.
            let output = OutputArgs {
                out: output.out.or_else(|| spec.output_path.clone().map(PathBuf::from)),
                format: output.format,
            };
            emit(&rows, &output)
        }
        Command::Flops { n, k, scheme } => flops_table(n, k, scheme.as_deref()),
        Command::SweepDelta {
            scheme,
            snr,
            sigma_e2,
            grid,
            channels,
            errors,
            seed,
            parallel,
            output,
        } => {
            configure_threads(parallel)?;
            let parsed: SchemeSpec = scheme.parse()?;
            let mut cfg = SystemConfig::new(12, vec![2; 6], None)?;
            cfg.mc_channels = channels;
            cfg.mc_errors = errors;
            cfg.seed = seed;
            let model = ErrorModel::Fixed { sigma_e2 };
            model.validate()?;
            let rows = sweep_delta(&cfg, &parsed, &model, snr, grid)?;
            emit(&rows, &output)
        }
        Command::Benchmark { channels, errors, seed, parallel, output } => {
            configure_threads(parallel)?;
            let rows = run_benchmark(seed, channels, errors)?;
            emit(&rows, &output)
        }
        Command::ScaledSweep { channels, errors, seed, parallel, output } => {
            configure_threads(parallel)?;
            let rows = run_experiment(&scaled_error_spec(seed, channels, errors))?;
            emit(&rows, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
