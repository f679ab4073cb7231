use std::collections::BTreeMap;
use std::fs;

use serde::Serialize;
use tempdeg_core::metrics::{
    expand_box, flicker_energy, metric_gains, pair_sidecars, parse_sidecar, psnr, ssim, uniform_frame_indices,
    CropBox, Gain, MetricReport,
};
use tempdeg_core::{Clip, ClipShape, Error as CoreError};

use super::{load_clip, sample_count, to_json, with_pool, write_new};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct FlickerReport {
    pub reference: f64,
    pub test: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampledCrop {
    pub frame_index: usize,
    #[serde(rename = "box")]
    pub bbox: CropBox,
    pub expanded_box: CropBox,
}

#[derive(Debug, Clone, Serialize)]
pub struct CropReport {
    pub box_expand: f64,
    pub crops: Vec<SampledCrop>,
    pub gains: BTreeMap<String, Gain>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub shape: ClipShape,
    pub sampled_frames: Vec<usize>,
    pub metrics: Vec<MetricReport>,
    pub flicker: Option<FlickerReport>,
    pub crops: Option<CropReport>,
}

fn read_sidecar(path: &std::path::Path) -> CliResult<Vec<tempdeg_core::metrics::SidecarEntry>> {
    Ok(parse_sidecar(&fs::read_to_string(path)?)?)
}

fn crop_report(cfg: &RunConfig, shape: ClipShape, sampled: &[usize]) -> CliResult<Option<CropReport>> {
    let (a, b) = match (&cfg.sidecar_in, &cfg.sidecar_out) {
        (None, None) => return Ok(None),
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CliError::config("score sidecars come in pairs: give both --sidecar-in and --sidecar-out")),
    };
    let pairs = pair_sidecars(&read_sidecar(a)?, &read_sidecar(b)?)?;
    if let Some(p) = pairs.iter().find(|p| p.frame_index >= shape.frames) {
        return Err(CoreError::Sidecar(format!(
            "crop on frame {} of a {}-frame clip",
            p.frame_index, shape.frames
        ))
        .into());
    }
    let mut crops = Vec::new();
    for p in pairs.iter().filter(|p| sampled.contains(&p.frame_index)) {
        let expanded = expand_box(p.bbox, cfg.box_expand, shape.height, shape.width)
            .map_err(|e| CoreError::Sidecar(format!("frame {}: {e}", p.frame_index)))?;
        crops.push(SampledCrop {
            frame_index: p.frame_index,
            bbox: p.bbox,
            expanded_box: expanded,
        });
    }
    Ok(Some(CropReport {
        box_expand: cfg.box_expand,
        crops,
        gains: metric_gains(&pairs, sampled)?,
    }))
}

fn compute(cfg: &RunConfig, samples: usize, reference: &Clip, test: &Clip) -> CliResult<EvalReport> {
    if reference.shape() != test.shape() {
        return Err(CoreError::ShapeMismatch(format!(
            "reference is {}, test is {}",
            reference.shape(),
            test.shape()
        ))
        .into());
    }
    let shape = reference.shape();
    let sampled = uniform_frame_indices(shape.frames, samples)?;
    let mut metrics = Vec::new();
    for m in &cfg.metrics {
        metrics.push(match m.as_str() {
            "psnr" => psnr(reference, test)?,
            _ => ssim(reference, test)?,
        });
    }
    let flicker = if shape.frames >= 2 {
        Some(FlickerReport {
            reference: flicker_energy(reference)?,
            test: flicker_energy(test)?,
        })
    } else {
        None
    };
    Ok(EvalReport {
        shape,
        crops: crop_report(cfg, shape, &sampled)?,
        sampled_frames: sampled,
        metrics,
        flicker,
    })
}

/// Compares a test clip with its reference and optionally pairs crop score sidecars.
pub fn eval(cfg: &RunConfig) -> CliResult<EvalReport> {
    let reference = load_clip(cfg.require(&cfg.reference, "reference")?)?;
    let test = load_clip(cfg.require(&cfg.test, "test")?)?;
    let samples = sample_count(cfg.samples, reference.len());
    let report = with_pool(cfg.threads, || compute(cfg, samples, &reference, &test))??;
    println!("seed: none (evaluation is deterministic)");
    for m in &report.metrics {
        println!("{}: mean {:.4} {}", m.metric, m.mean, m.units);
    }
    if let Some(f) = &report.flicker {
        println!("flicker: reference {:.6}, test {:.6}", f.reference, f.test);
    }
    if let Some(c) = &report.crops {
        for (id, g) in &c.gains {
            println!(
                "gain {id}: {:+.2}% (delta {:+.4}, {} crops, {} excluded)",
                g.percent, g.mean_delta, g.used, g.excluded
            );
        }
    }
    let json = to_json(&report);
    match &cfg.report {
        Some(path) => write_new(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(report)
}
