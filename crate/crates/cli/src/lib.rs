//! `rfmc` command-line front end.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rfmc_core::bench::InferencePath;
use rfmc_core::channel::{default_snr_grid, parse_snr_grid, SnrSpec};

pub mod classifier;
pub mod commands;
pub mod serve;

#[derive(Debug, Parser)]
#[command(name = "rfmc", version, about = "Synthetic RF modulation classifier with a 16-bit fixed-point inference path")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a labeled dataset file.
    GenData(GenDataArgs),
    /// Train a float model on a dataset.
    Train(TrainArgs),
    /// Convert a float model to the 16-bit fixed-point format.
    Quantize(QuantizeArgs),
    /// Confusion matrix and accuracy of a model on a dataset.
    Eval(EvalArgs),
    /// Per-frame latency and throughput.
    Bench(BenchArgs),
    /// Label frames from a dataset, a raw int16 file or standard input.
    Classify(ClassifyArgs),
    /// Classify raw int16 frames arriving over TCP.
    Serve(ServeArgs),
}

/// SNR grid flag: `start:end:step`, a single value or a comma list.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid(pub Vec<SnrSpec>);

impl FromStr for SnrGrid {
    type Err = rfmc_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_snr_grid(s).map(SnrGrid)
    }
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid(default_snr_grid())
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub frames_per_class: usize,
    /// SNR grid in dB, e.g. 0:18:2.
    #[arg(long, default_value = "0:18:2")]
    pub snr: SnrGrid,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    /// Fraction of each class used for training; the rest validates.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Write the validation split here as a dataset file.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Calibration dataset.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Use at most this many calibration frames, spread evenly.
    #[arg(long)]
    pub calibration_frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, required_unless_present = "oracle")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub path: Option<InferencePath>,
    /// Evaluate both paths and print the gap.
    #[arg(long, conflicts_with = "path")]
    pub compare: bool,
    /// Quantized model for --compare; quantized on the fly when absent.
    #[arg(long, requires = "compare")]
    pub qmodel: Option<PathBuf>,
    /// Calibration dataset for on-the-fly quantization; defaults to --dataset.
    #[arg(long, requires = "compare")]
    pub calibration: Option<PathBuf>,
    /// Self-test: predict the ground truth.
    #[arg(long, conflicts_with_all = ["model", "compare"])]
    pub oracle: bool,
    /// Print whitespace-separated `snr_db n accuracy` columns only.
    #[arg(long)]
    pub columns: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Frames to time; synthesized from --seed when absent.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Benchmark only this path; both when absent.
    #[arg(long)]
    pub path: Option<InferencePath>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 1000)]
    pub frames: usize,
    #[arg(long, default_value_t = 100)]
    pub warmup: usize,
    /// Seconds of sustained throughput measurement; 0 skips it.
    #[arg(long, default_value_t = 0.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Write per-frame latencies as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Read frames from a dataset file instead of raw input.
    #[arg(long, conflicts_with = "input")]
    pub dataset: Option<PathBuf>,
    /// Raw little-endian int16 I/Q file; `-` or absent reads standard input.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub path: Option<InferencePath>,
    /// Fractional bits of raw samples for a float model.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=15))]
    pub input_frac: Option<u8>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// 0 picks a free port; the bound address is printed.
    #[arg(long, default_value_t = 5005)]
    pub port: u16,
    #[arg(long)]
    pub path: Option<InferencePath>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=15))]
    pub input_frac: Option<u8>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::GenData(a) => commands::gen_data(&a, &mut out),
        Command::Train(a) => commands::train(&a, &mut out),
        Command::Quantize(a) => commands::quantize(&a, &mut out),
        Command::Eval(a) => commands::eval(&a, &mut out),
        Command::Bench(a) => commands::bench(&a, &mut out),
        Command::Classify(a) => commands::classify(&a, &mut out),
        Command::Serve(a) => {
            drop(out);
            commands::serve(&a)
        }
    }
}
