//! The `tempdeg` command line: degrade, replay, eval, bench and preview.
//!
//! Exit status is 0 on success, 2 for configuration errors, 3 for I/O
//! errors, 4 for shape or format errors and 5 for malformed score sidecars.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tempdeg_core::curriculum::Preset;

use crate::config::{ConfigLayer, RunConfig};
pub use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "tempdeg", version, about = "Temporally coherent video degradation and evaluation")]
pub struct Cli {
    /// Flat JSON file with defaults for any option; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = one per core). Never changes output bytes.
    #[arg(long, short = 'j', global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degrade a clip with a sampled recipe and save the recipe.
    Degrade(DegradeArgs),
    /// Re-apply a saved recipe.
    Replay(ReplayArgs),
    /// Full-reference metrics, flicker energy and crop score gains.
    Eval(EvalArgs),
    /// Throughput on a synthetic clip across thread counts.
    Bench(BenchArgs),
    /// Contact sheet of clean and degraded frames.
    Preview(PreviewArgs),
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    /// Input frame directory or .y4m file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Output frame directory or .y4m file.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Where to write the recipe JSON.
    #[arg(long, short)]
    pub recipe: Option<PathBuf>,
    #[arg(long, short)]
    pub preset: Option<Preset>,
    #[arg(long, short)]
    pub seed: Option<u64>,
    /// Frame rate written to y4m outputs.
    #[arg(long)]
    pub fps: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, short)]
    pub recipe: Option<PathBuf>,
    #[arg(long)]
    pub fps: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Clean reference clip.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Clip under test.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Crop scores for the input side.
    #[arg(long)]
    pub sidecar_in: Option<PathBuf>,
    /// Crop scores for the output side.
    #[arg(long)]
    pub sidecar_out: Option<PathBuf>,
    /// Frames sampled for crop gains.
    #[arg(long, short = 'n')]
    pub samples: Option<usize>,
    /// Fraction added to each side of every crop box.
    #[arg(long)]
    pub box_expand: Option<f64>,
    /// Comma-separated metric ids (psnr, ssim).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long, short)]
    pub preset: Option<Preset>,
    #[arg(long, short)]
    pub seed: Option<u64>,
    /// Timed runs per thread count; the median is reported.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated pool sizes to measure.
    #[arg(long, value_delimiter = ',')]
    pub thread_counts: Option<Vec<usize>>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// PNG file to create.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, short = 'n')]
    pub samples: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Degrade(_) => "degrade",
            Command::Replay(_) => "replay",
            Command::Eval(_) => "eval",
            Command::Bench(_) => "bench",
            Command::Preview(_) => "preview",
        }
    }

    fn layer(&self) -> ConfigLayer {
        let base = ConfigLayer::default();
        match self {
            Command::Degrade(a) => ConfigLayer {
                input: a.input.clone(),
                output: a.output.clone(),
                recipe: a.recipe.clone(),
                preset: a.preset,
                seed: a.seed,
                fps: a.fps,
                ..base
            },
            Command::Replay(a) => ConfigLayer {
                input: a.input.clone(),
                output: a.output.clone(),
                recipe: a.recipe.clone(),
                fps: a.fps,
                ..base
            },
            Command::Eval(a) => ConfigLayer {
                reference: a.reference.clone(),
                test: a.test.clone(),
                sidecar_in: a.sidecar_in.clone(),
                sidecar_out: a.sidecar_out.clone(),
                samples: a.samples,
                box_expand: a.box_expand,
                metrics: a.metrics.clone(),
                report: a.report.clone(),
                ..base
            },
            Command::Bench(a) => ConfigLayer {
                width: a.width,
                height: a.height,
                frames: a.frames,
                preset: a.preset,
                seed: a.seed,
                runs: a.runs,
                thread_counts: a.thread_counts.clone(),
                report: a.report.clone(),
                ..base
            },
            Command::Preview(a) => ConfigLayer {
                reference: a.reference.clone(),
                test: a.test.clone(),
                output: a.output.clone(),
                samples: a.samples,
                ..base
            },
        }
    }
}

impl Cli {
    /// Resolves flags, the optional config file and defaults into one configuration.
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let file = match &self.config {
            Some(path) => ConfigLayer::load(path).map_err(|e| match e {
                CliError::Core(io) => CliError::config(format!("cannot read {}: {io}", path.display())),
                other => other,
            })?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            threads: self.threads,
            ..self.command.layer()
        };
        RunConfig::resolve(self.command.name(), flags, file)
    }
}

/// Runs one resolved command.
pub fn execute(cfg: &RunConfig) -> CliResult<()> {
    match cfg.command.as_str() {
        "degrade" => commands::degrade(cfg).map(drop),
        "replay" => commands::replay(cfg).map(drop),
        "eval" => commands::eval(cfg).map(drop),
        "bench" => commands::bench(cfg).map(drop),
        "preview" => commands::preview(cfg).map(drop),
        other => Err(CliError::config(format!("unknown command {other:?}"))),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.run_config().and_then(|cfg| execute(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tempdeg: {e}");
            e.exit_code()
        }
    }
}
