use std::fs;
use std::time::Instant;

use serde::Serialize;
use tempdeg_core::curriculum::{apply_recipe, degrade as degrade_clip, RecipeRecord};
use tempdeg_core::vio::{write_clip, FrameRate};
use tempdeg_core::ClipShape;

use super::{clip_hash, load_clip, with_pool, write_new};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct DegradeSummary {
    pub shape: ClipShape,
    pub preset: String,
    pub seed: u64,
    pub seconds: f64,
    pub frames_per_second: f64,
    pub audit: Vec<String>,
    pub hash: String,
}

impl DegradeSummary {
    fn print(&self) {
        println!("seed: {}", self.seed);
        println!("preset: {}", self.preset);
        println!("shape: {}", self.shape);
        println!(
            "time: {:.3} s ({:.2} frames/s)",
            self.seconds, self.frames_per_second
        );
        if self.audit.is_empty() {
            println!("audit: all parameters within preset ranges");
        } else {
            for issue in &self.audit {
                println!("audit: {issue}");
            }
        }
        println!("sha256: {}", self.hash);
    }
}

fn ensure_absent(path: &std::path::Path) -> CliResult<()> {
    if path.exists() && !(path.is_dir() && fs::read_dir(path)?.next().is_none()) {
        return Err(CliError::Core(
            std::io::Error::new(
                std::io::ErrorKind::AlreadyExists,
                format!("{} already exists", path.display()),
            )
            .into(),
        ));
    }
    Ok(())
}

/// Degrades the input with a freshly sampled recipe and writes the clip and the recipe.
pub fn degrade(cfg: &RunConfig) -> CliResult<DegradeSummary> {
    let input = cfg.require(&cfg.input, "input")?;
    let output = cfg.require(&cfg.output, "output")?;
    let recipe_path = cfg.require(&cfg.recipe, "recipe")?;
    let preset = *cfg.require(&cfg.preset, "preset")?;
    let seed = *cfg.require(&cfg.seed, "seed")?;
    ensure_absent(output)?;
    ensure_absent(recipe_path)?;
    let rate = FrameRate::new(cfg.fps, 1)?;

    let clip = load_clip(input)?;
    let start = Instant::now();
    let (out, record) = with_pool(cfg.threads, || degrade_clip(&clip, preset, seed))??;
    let seconds = start.elapsed().as_secs_f64();
    write_clip(&out, output, rate)?;
    write_new(recipe_path, record.to_canonical_json().as_bytes())?;

    let summary = DegradeSummary {
        shape: out.shape(),
        preset: preset.to_string(),
        seed,
        seconds,
        frames_per_second: out.len() as f64 / seconds.max(f64::EPSILON),
        audit: record.audit(),
        hash: clip_hash(&out),
    };
    summary.print();
    Ok(summary)
}

/// Re-applies a stored recipe to a clip of the recorded shape.
pub fn replay(cfg: &RunConfig) -> CliResult<DegradeSummary> {
    let input = cfg.require(&cfg.input, "input")?;
    let output = cfg.require(&cfg.output, "output")?;
    let recipe_path = cfg.require(&cfg.recipe, "recipe")?;
    ensure_absent(output)?;
    let rate = FrameRate::new(cfg.fps, 1)?;

    let record = RecipeRecord::from_json(&fs::read_to_string(recipe_path)?)?;
    let clip = load_clip(input)?;
    let start = Instant::now();
    let out = with_pool(cfg.threads, || apply_recipe(&clip, &record))??;
    let seconds = start.elapsed().as_secs_f64();
    write_clip(&out, output, rate)?;

    let summary = DegradeSummary {
        shape: out.shape(),
        preset: record.preset.to_string(),
        seed: record.seed,
        seconds,
        frames_per_second: out.len() as f64 / seconds.max(f64::EPSILON),
        audit: record.audit(),
        hash: clip_hash(&out),
    };
    summary.print();
    Ok(summary)
}
