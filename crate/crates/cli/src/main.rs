//! `fiberseg`: generate → rasterize → degrade/fbp → annotate → segment → evaluate → stats.
//!
//! Every subcommand prints a one-line JSON summary on stdout. Failures print one JSON
//! line `{"stage": ..., "error": ...}` on stderr, remove the files the failing
//! subcommand had started to write, and exit with status 1.

mod config;
mod outputs;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::PipelineConfig;
use outputs::Outputs;

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nvolume format: raw + json sidecar, x-fastest, little-endian (f32, u32, u8)",
    "\nfibers.csv format: id,x0,y0,z0,x1,y1,z1,radius_um"
);

#[derive(Parser, Debug)]
#[command(name = "fiberseg", version = VERSION, about = "Synthetic fiber CT volumes, vesselness segmentation and evaluation")]
struct Cli {
    /// Pipeline configuration JSON; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the model seed and the noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Caps the worker threads used inside each stage.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random fiber packing: writes fibers.csv, model.stl and stats.json.
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Fibers to ground-truth labels (`gt`) and attenuation (`attenuation`) volumes.
    Rasterize {
        #[arg(long)]
        fibers: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gaussian blur plus additive Gaussian noise.
    Degrade(VolumeIo),
    /// Per-slice parallel-beam projection and filtered back projection.
    Fbp {
        #[command(flatten)]
        io: VolumeIo,
        /// Also write the sinogram of this z-slice to `<output>.sino`.
        #[arg(long)]
        sinogram_slice: Option<usize>,
    },
    /// Polyline annotations plus a gray volume to a label volume by region growing.
    Annotate {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        gray: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the configured growing threshold.
        #[arg(long)]
        threshold: Option<f32>,
    },
    /// Vesselness, binary mask and instance labels; optionally the orientation field.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        orientation: bool,
    },
    /// Dice and Adjusted Rand Index of a prediction against ground truth.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Length and orientation histograms of fibers.csv or of a label volume.
    Stats {
        #[arg(long, conflicts_with = "labels", required_unless_present = "labels")]
        fibers: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Every stage in sequence into one directory, ending with metrics.json.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct VolumeIo {
    /// Input volume stem (without .json / .raw).
    #[arg(long)]
    input: PathBuf,
    /// Output volume stem.
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = stage_name(&cli.command);
    let mut outputs = Outputs::default();
    match run(cli, &mut outputs) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err((stage_override, message)) => {
            outputs.remove_all();
            let line = serde_json::json!({ "stage": stage_override.unwrap_or(stage), "error": message });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

fn stage_name(c: &Command) -> &'static str {
    match c {
        Command::Generate { .. } => "generate",
        Command::Rasterize { .. } => "rasterize",
        Command::Degrade(_) => "degrade",
        Command::Fbp { .. } => "fbp",
        Command::Annotate { .. } => "annotate",
        Command::Segment { .. } => "segment",
        Command::Evaluate { .. } => "evaluate",
        Command::Stats { .. } => "stats",
        Command::Pipeline { .. } => "pipeline",
    }
}

/// Error carrying an optional stage name that replaces the subcommand's.
pub type StageError = (Option<&'static str>, String);

fn in_stage(stage: &'static str) -> impl Fn(fiberseg_core::Error) -> StageError {
    move |e| (Some(stage), e.to_string())
}

fn run(cli: Cli, out: &mut Outputs) -> Result<serde_json::Value, StageError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| (Some("config"), e.to_string()))?;
    }
    let cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(in_stage("config"))?,
        None => PipelineConfig::default(),
    }
    .with_seed(cli.seed);
    cfg.validate().map_err(in_stage("config"))?;

    let r = match cli.command {
        Command::Generate { out: dir } => stages::generate(&cfg, &dir, out),
        Command::Rasterize { fibers, out: dir } => stages::rasterize(&cfg, &fibers, &dir, out),
        Command::Degrade(io) => stages::degrade(&cfg, &io.input, &io.output, out),
        Command::Fbp { io, sinogram_slice } => stages::fbp(&cfg, &io.input, &io.output, sinogram_slice, out),
        Command::Annotate { annotations, gray, output, threshold } => {
            stages::annotate(&cfg, &annotations, &gray, &output, threshold, out)
        }
        Command::Segment { input, out: dir, orientation } => stages::segment(&cfg, &input, &dir, orientation, out),
        Command::Evaluate { truth, pred, output } => stages::evaluate(&cfg, &truth, &pred, output.as_deref(), out),
        Command::Stats { fibers, labels, output } => {
            stages::stats(&cfg, fibers.as_deref(), labels.as_deref(), output.as_deref(), out)
        }
        Command::Pipeline { out: dir } => return stages::pipeline(&cfg, &dir, out),
    };
    r.map_err(|e| (None, e.to_string()))
}
