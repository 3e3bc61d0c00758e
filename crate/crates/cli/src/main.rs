//! `traincast`: predict the execution time of CNN training on
//! many-core processors from closed-form performance models.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use traincast_core::predict::{ChunkMode, Strategy};

mod commands;
mod config;
mod error;
mod output;

use commands::{ParamOverridesA, ParamOverridesB, WorkloadOverrides};
use error::AppError;
use output::Format;

#[derive(Parser)]
#[command(
    name = "traincast",
    version,
    about = "Analytical execution-time prediction for CNN training on many-core processors",
    after_help = "Exit codes: 0 success, 1 validation error, 2 I/O error."
)]
struct Cli {
    /// Bundled parameter preset: 'paper' (published tables verbatim) or
    /// 'paper-tableIX' (medium prep_ops = 1e9 override)
    #[arg(long, global = true, default_value = "paper")]
    preset: String,

    /// TOML dataset document layered over the preset
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write the output to a file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    A,
    B,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::A => Strategy::A,
            StrategyArg::B => Strategy::B,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChunkArg {
    /// Real-valued n/p shares (reproduces the published tables)
    Exact,
    /// ceil(n/p): the slowest worker's share
    Ceil,
}

impl From<ChunkArg> for ChunkMode {
    fn from(value: ChunkArg) -> Self {
        match value {
            ChunkArg::Exact => ChunkMode::Exact,
            ChunkArg::Ceil => ChunkMode::Ceil,
        }
    }
}

#[derive(Args)]
struct WorkloadFlags {
    /// Training/validation image count (default: dataset value)
    #[arg(long = "i", value_name = "N")]
    images: Option<u64>,

    /// Test image count (default: dataset value)
    #[arg(long = "it", value_name = "N")]
    test_images: Option<u64>,

    /// Epoch count (default: dataset value)
    #[arg(long = "ep", value_name = "N")]
    epochs: Option<u32>,
}

impl WorkloadFlags {
    fn overrides(&self) -> WorkloadOverrides {
        WorkloadOverrides {
            images: self.images,
            test_images: self.test_images,
            epochs: self.epochs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Predict the execution time of one workload
    Predict {
        /// Prediction strategy
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Architecture name from the dataset
        #[arg(long)]
        arch: String,
        /// Processing-unit (thread) count
        #[arg(long = "p", value_name = "N")]
        threads: u32,
        /// Network-instance count (default: one per thread)
        #[arg(long = "ns", value_name = "N")]
        network_instances: Option<u32>,
        /// Per-thread share mode
        #[arg(long, value_enum, default_value_t = ChunkArg::Exact)]
        chunk: ChunkArg,
        #[command(flatten)]
        workload: WorkloadFlags,
        /// Override prep_ops (strategy a)
        #[arg(long)]
        prep_ops: Option<f64>,
        /// Override fprop_ops (strategy a)
        #[arg(long)]
        fprop_ops: Option<f64>,
        /// Override bprop_ops (strategy a)
        #[arg(long)]
        bprop_ops: Option<f64>,
        /// Override the operation factor (strategy a)
        #[arg(long)]
        operation_factor: Option<f64>,
        /// Override the preparation seconds (strategy b)
        #[arg(long)]
        prep_s: Option<f64>,
        /// Override the forward seconds per image (strategy b)
        #[arg(long)]
        fprop_s: Option<f64>,
        /// Override the backward seconds per image (strategy b)
        #[arg(long)]
        bprop_s: Option<f64>,
    },

    /// Evaluate both strategies across thread counts
    Sweep {
        /// Comma-separated thread counts
        #[arg(long, value_delimiter = ',', required = true, value_name = "N,...")]
        threads: Vec<u32>,
        /// Comma-separated architectures (default: all in the dataset)
        #[arg(long = "archs", value_delimiter = ',', value_name = "NAME,...")]
        archs: Vec<String>,
        #[command(flatten)]
        workload: WorkloadFlags,
    },

    /// Evaluate strategy (a) over an image/epoch/thread grid
    ScaleGrid {
        /// Architecture name
        #[arg(long, default_value = "small")]
        arch: String,
        /// Comma-separated i/it pairs (default: 60000/10000,120000/20000,240000/40000)
        #[arg(long, value_delimiter = ',', value_name = "I/IT,...")]
        images: Vec<String>,
        /// Comma-separated epoch counts (default: 70,140,280)
        #[arg(long, value_delimiter = ',', value_name = "N,...")]
        epochs: Vec<u32>,
        /// Comma-separated thread counts (default: 240,480)
        #[arg(long, value_delimiter = ',', value_name = "N,...")]
        threads: Vec<u32>,
    },

    /// Fit the contention curve and predict it at new thread counts
    FitContention {
        /// Architecture name
        #[arg(long)]
        arch: String,
        /// Thread counts to evaluate (default: 480,960,1920,3840)
        #[arg(long, value_delimiter = ',', value_name = "N,...")]
        predict: Vec<u32>,
        /// Fit only measured samples with p <= this bound
        #[arg(long, value_name = "N")]
        fit_range: Option<u32>,
    },

    /// Per-layer statistics and operation counts for an architecture
    CountOps {
        /// Architecture name from the dataset
        #[arg(long)]
        arch: Option<String>,
        /// Standalone architecture TOML file
        #[arg(long, value_name = "PATH")]
        file: Option<PathBuf>,
    },

    /// Compare predictions against measured runs from a CSV
    /// (header: arch,p,i,it,ep,measured_s)
    Validate {
        /// Prediction strategy
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Measured-runs CSV
        #[arg(long, value_name = "PATH")]
        measured: PathBuf,
    },

    /// Back-solve the strategy-(a) operation factor from a measured run
    Calibrate {
        /// Architecture name
        #[arg(long)]
        arch: String,
        /// Thread count of the measured run
        #[arg(long = "p", value_name = "N")]
        threads: u32,
        /// Measured total execution time in seconds
        #[arg(long, value_name = "SECONDS")]
        measured_s: f64,
        #[command(flatten)]
        workload: WorkloadFlags,
    },

    /// Print the bundled constants with their citations
    Dataset,
}

fn parse_image_pair(text: &str) -> Result<(u64, u64), AppError> {
    let mut parts = text.split('/');
    let err = || {
        AppError::validation(format!(
            "invalid value '{text}' for --images: expected I/IT, e.g. 60000/10000"
        ))
    };
    let i = parts
        .next()
        .ok_or_else(err)?
        .trim()
        .parse()
        .map_err(|_| err())?;
    let it = parts
        .next()
        .ok_or_else(err)?
        .trim()
        .parse()
        .map_err(|_| err())?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok((i, it))
}

fn run(cli: Cli) -> Result<(), AppError> {
    let dataset = config::load_dataset(&cli.preset, cli.config.as_deref())?;
    let format = cli.format;
    let out = cli.out.as_deref();

    let (output, toml_payload) = match &cli.command {
        Command::Predict {
            strategy,
            arch,
            threads,
            network_instances,
            chunk,
            workload,
            prep_ops,
            fprop_ops,
            bprop_ops,
            operation_factor,
            prep_s,
            fprop_s,
            bprop_s,
        } => (
            commands::cmd_predict(
                &dataset,
                (*strategy).into(),
                arch,
                *threads,
                *network_instances,
                (*chunk).into(),
                &workload.overrides(),
                &ParamOverridesA {
                    prep_ops: *prep_ops,
                    fprop_ops: *fprop_ops,
                    bprop_ops: *bprop_ops,
                    operation_factor: *operation_factor,
                },
                &ParamOverridesB {
                    prep_s: *prep_s,
                    fprop_s: *fprop_s,
                    bprop_s: *bprop_s,
                },
            )?,
            None,
        ),
        Command::Sweep {
            threads,
            archs,
            workload,
        } => (
            commands::cmd_sweep(&dataset, threads, archs, &workload.overrides())?,
            None,
        ),
        Command::ScaleGrid {
            arch,
            images,
            epochs,
            threads,
        } => {
            let image_grid: Vec<(u64, u64)> = if images.is_empty() {
                vec![(60_000, 10_000), (120_000, 20_000), (240_000, 40_000)]
            } else {
                images
                    .iter()
                    .map(|s| parse_image_pair(s))
                    .collect::<Result<_, _>>()?
            };
            let epoch_grid = if epochs.is_empty() {
                vec![70, 140, 280]
            } else {
                epochs.clone()
            };
            let thread_grid = if threads.is_empty() {
                vec![240, 480]
            } else {
                threads.clone()
            };
            (
                commands::cmd_scale_grid(&dataset, arch, &image_grid, &epoch_grid, &thread_grid)?,
                None,
            )
        }
        Command::FitContention {
            arch,
            predict,
            fit_range,
        } => {
            let predict_at = if predict.is_empty() {
                vec![480, 960, 1920, 3840]
            } else {
                predict.clone()
            };
            (
                commands::cmd_fit_contention(&dataset, arch, &predict_at, *fit_range)?,
                None,
            )
        }
        Command::CountOps { arch, file } => (
            commands::cmd_count_ops(&dataset, arch.as_deref(), file.as_deref())?,
            None,
        ),
        Command::Validate { strategy, measured } => {
            let runs = config::parse_measured_csv(measured)?;
            (
                commands::cmd_validate(&dataset, (*strategy).into(), &runs)?,
                None,
            )
        }
        Command::Calibrate {
            arch,
            threads,
            measured_s,
            workload,
        } => (
            commands::cmd_calibrate(&dataset, arch, *threads, *measured_s, &workload.overrides())?,
            None,
        ),
        Command::Dataset => {
            let (output, payload) = commands::cmd_dataset(&dataset)?;
            (output, Some(payload))
        }
    };

    output::emit(&output, format, out, toml_payload.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // flag and usage problems are validation errors (exit 1)
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
