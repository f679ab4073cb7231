//! Run configuration: command-line flags over an optional JSON file over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempdeg_core::curriculum::Preset;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: usize = 16;
pub const DEFAULT_BOX_EXPAND: f64 = 0.1;
pub const DEFAULT_FPS: u32 = 24;
pub const DEFAULT_METRICS: [&str; 2] = ["psnr", "ssim"];
pub const KNOWN_METRICS: [&str; 2] = ["psnr", "ssim"];

/// One layer of settings; every field is optional so layers can be stacked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub recipe: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub sidecar_in: Option<PathBuf>,
    pub sidecar_out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub metrics: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub box_expand: Option<f64>,
    pub threads: Option<usize>,
    pub fps: Option<u32>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub frames: Option<usize>,
    pub runs: Option<usize>,
    pub thread_counts: Option<Vec<usize>>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($field:ident),+) => {
        ConfigLayer { $($field: $hi.$field.or($lo.$field)),+ }
    };
}

impl ConfigLayer {
    /// Parses a flat JSON config document.
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        overlay!(
            self, lower, command, input, output, reference, test, recipe, report, sidecar_in, sidecar_out, preset,
            seed, metrics, samples, box_expand, threads, fps, width, height, frames, runs, thread_counts
        )
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub recipe: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub sidecar_in: Option<PathBuf>,
    pub sidecar_out: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub metrics: Vec<String>,
    pub samples: usize,
    pub box_expand: f64,
    /// 0 selects one worker per available core.
    pub threads: usize,
    pub fps: u32,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub runs: usize,
    pub thread_counts: Vec<usize>,
}

impl RunConfig {
    /// Stacks `flags` over `file` over the built-in defaults and checks the result.
    pub fn resolve(command: &str, flags: ConfigLayer, file: ConfigLayer) -> CliResult<Self> {
        if let Some(c) = &file.command {
            if c != command {
                return Err(CliError::config(format!(
                    "config file is for `{c}`, running `{command}`"
                )));
            }
        }
        let l = flags.over(file);
        let cfg = RunConfig {
            command: command.to_string(),
            input: l.input,
            output: l.output,
            reference: l.reference,
            test: l.test,
            recipe: l.recipe,
            report: l.report,
            sidecar_in: l.sidecar_in,
            sidecar_out: l.sidecar_out,
            preset: l.preset,
            seed: l.seed,
            metrics: l
                .metrics
                .unwrap_or_else(|| DEFAULT_METRICS.iter().map(|m| m.to_string()).collect()),
            samples: l.samples.unwrap_or(DEFAULT_SAMPLES),
            box_expand: l.box_expand.unwrap_or(DEFAULT_BOX_EXPAND),
            threads: l.threads.unwrap_or(0),
            fps: l.fps.unwrap_or(DEFAULT_FPS),
            width: l.width.unwrap_or(1280),
            height: l.height.unwrap_or(720),
            frames: l.frames.unwrap_or(49),
            runs: l.runs.unwrap_or(5),
            thread_counts: l.thread_counts.unwrap_or_else(|| vec![1, 2, 4, 8]),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::config("samples must be at least 1"));
        }
        if !(self.box_expand.is_finite() && self.box_expand >= 0.0) {
            return Err(CliError::config(format!("box_expand {} must be >= 0", self.box_expand)));
        }
        if self.fps == 0 {
            return Err(CliError::config("fps must be positive"));
        }
        if let Some(m) = self.metrics.iter().find(|m| !KNOWN_METRICS.contains(&m.as_str())) {
            return Err(CliError::config(format!("unknown metric {m:?} (known: psnr, ssim)")));
        }
        if self.runs == 0 || self.thread_counts.is_empty() || self.thread_counts.contains(&0) {
            return Err(CliError::config("bench needs runs >= 1 and positive thread counts"));
        }
        if self.width == 0 || self.height == 0 || self.frames < 2 {
            return Err(CliError::config("bench clip needs positive size and at least 2 frames"));
        }
        Ok(())
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| CliError::config(format!("`{}` needs --{name}", self.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = ConfigLayer::from_json(r#"{"seed": 3, "samples": 8, "preset": "medium"}"#).unwrap();
        let flags = ConfigLayer {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("degrade", flags, file).unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.samples, 8);
        assert_eq!(cfg.preset, Some(Preset::Medium));
        assert_eq!(cfg.box_expand, 0.1);
        assert_eq!(cfg.threads, 0);
    }

    #[test]
    fn bad_files_are_config_errors() {
        assert!(ConfigLayer::from_json(r#"{"sead": 3}"#).is_err());
        assert!(ConfigLayer::from_json(r#"{"preset": "extreme"}"#).is_err());
        assert!(ConfigLayer::from_json("[").is_err());
        let file = ConfigLayer::from_json(r#"{"command": "eval"}"#).unwrap();
        assert!(RunConfig::resolve("degrade", ConfigLayer::default(), file).is_err());
        let file = ConfigLayer::from_json(r#"{"metrics": ["lpips"]}"#).unwrap();
        let err = RunConfig::resolve("eval", ConfigLayer::default(), file).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
