//! `pot` — pooled time-series video representations from the command line.
//!
//! Four subcommands mirror the pipeline stages: `extract` turns frame
//! directories into per-frame descriptor files, `represent` turns
//! descriptor files into fixed-length video vectors (PoT, bag of words, or
//! improved Fisher vectors), `evaluate` classifies representations with a
//! χ² kernel SVM over repeated random splits, and `dtw` runs the 1-NN
//! dynamic-time-warping baseline directly on descriptor sequences.
//!
//! Every command is deterministic given its flags and `--seed`, and every
//! output file carries a header with the tool version, the parameters, and
//! digests of its inputs.

mod commands;
mod util;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pot", version, about = "Pooled time-series video representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every subcommand shares.
#[derive(Args)]
struct Shared {
    /// Dataset manifest (videos, labels, channel declarations).
    #[arg(long)]
    manifest: PathBuf,

    /// Base seed; all randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Fail instead of overwriting existing output files.
    #[arg(long)]
    no_clobber: bool,
}

/// Flags shared by the two split-based evaluation commands.
#[derive(Args)]
struct SplitArgs {
    /// Number of random train/test splits.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,

    /// Fraction of each class used for training.
    #[arg(long, default_value_t = 0.5)]
    split_frac: f64,

    /// Reuse the split plans from a previous `--save-splits` file
    /// (overrides --trials/--split-frac).
    #[arg(long)]
    split_plan: Option<PathBuf>,

    /// Write the split plans used to this file.
    #[arg(long)]
    save_splits: Option<PathBuf>,

    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-frame descriptors (or validate and copy precomputed
    /// ones) into an output directory.
    Extract {
        #[command(flatten)]
        shared: Shared,

        /// Channels to extract (default: all declared in the manifest).
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,

        /// Output directory for descriptor files.
        #[arg(long)]
        out: PathBuf,
    },

    /// Encode descriptor sequences into fixed-length video vectors.
    Represent {
        #[command(flatten)]
        shared: Shared,

        /// Encoding method.
        #[arg(long, value_enum, default_value_t = commands::represent::Method::Pot)]
        method: commands::represent::Method,

        /// Temporal pyramid levels (pot only).
        #[arg(long, default_value_t = 4)]
        levels: usize,

        /// Pooling operators, comma-separated from {sum,max,d1,d2} (pot only).
        #[arg(long, default_value = "sum,max,d1,d2")]
        ops: String,

        /// Codebook / mixture size (bow: default 400; ifv: default by
        /// descriptor dimension).
        #[arg(long)]
        k: Option<usize>,

        /// Channels to encode (default: all declared in the manifest).
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,

        /// Directory holding descriptor files for videos whose manifest
        /// record does not name one explicitly.
        #[arg(long)]
        descriptors: Option<PathBuf>,

        /// Train the bow/ifv quantizer on the first trial's training
        /// videos from this split-plan file instead of on all videos.
        #[arg(long)]
        split_plan: Option<PathBuf>,

        /// Output directory for representation files.
        #[arg(long)]
        out: PathBuf,
    },

    /// Classify representations with a χ² kernel SVM over repeated random
    /// splits and write a report.
    Evaluate {
        #[command(flatten)]
        shared: Shared,

        #[command(flatten)]
        splits: SplitArgs,

        /// Representation directories; more than one (comma-separated)
        /// evaluates each under identical splits and appends a [reseed]
        /// section aggregating them.
        #[arg(long, value_delimiter = ',', required = true)]
        representations: Vec<PathBuf>,

        /// Method whose representation files to load.
        #[arg(long, value_enum, default_value_t = commands::represent::Method::Pot)]
        method: commands::represent::Method,

        /// Channels combined in the multi-channel kernel (default: all
        /// declared in the manifest).
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,

        /// SVM regularization parameter.
        #[arg(long, default_value_t = 100.0)]
        c: f64,
    },

    /// Nearest-neighbor dynamic-time-warping baseline on raw descriptor
    /// sequences, same split protocol and report format.
    Dtw {
        #[command(flatten)]
        shared: Shared,

        #[command(flatten)]
        splits: SplitArgs,

        /// Descriptor channel to warp (default: first declared).
        #[arg(long)]
        channel: Option<String>,

        /// Directory holding descriptor files for videos whose manifest
        /// record does not name one explicitly.
        #[arg(long)]
        descriptors: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let shared = match &cli.command {
        Command::Extract { shared, .. }
        | Command::Represent { shared, .. }
        | Command::Evaluate { shared, .. }
        | Command::Dtw { shared, .. } => shared,
    };
    if let Some(jobs) = shared.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("building the worker thread pool")?;
    }
    match cli.command {
        Command::Extract {
            shared,
            channels,
            out,
        } => commands::extract::run(&shared, &channels, &out),
        Command::Represent {
            shared,
            method,
            levels,
            ops,
            k,
            channels,
            descriptors,
            split_plan,
            out,
        } => commands::represent::run(
            &shared,
            method,
            levels,
            &ops,
            k,
            &channels,
            descriptors.as_deref(),
            split_plan.as_deref(),
            &out,
        ),
        Command::Evaluate {
            shared,
            splits,
            representations,
            method,
            channels,
            c,
        } => commands::evaluate::run(&shared, &splits, &representations, method, &channels, c),
        Command::Dtw {
            shared,
            splits,
            channel,
            descriptors,
        } => commands::dtw::run(&shared, &splits, channel.as_deref(), descriptors.as_deref()),
    }
}
