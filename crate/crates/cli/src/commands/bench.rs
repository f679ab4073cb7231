use serde::Serialize;
use tempdeg_core::curriculum::{apply_recipe_timed, sample_recipe, Preset, StageTiming};
use tempdeg_core::synth::synthetic_clip;
use tempdeg_core::ClipShape;

use super::{clip_hash, to_json, with_pool, write_new};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Medians over repeated runs at one pool size.
#[derive(Debug, Clone, Serialize)]
pub struct ThreadRun {
    pub threads: usize,
    pub frames_per_second: f64,
    pub seconds: f64,
    pub stages: Vec<StageTiming>,
    pub hash: String,
}

impl ThreadRun {
    fn stage_seconds(&self, names: &[&str]) -> f64 {
        self.stages
            .iter()
            .filter(|s| names.contains(&s.stage.as_str()))
            .map(|s| s.seconds)
            .sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub shape: ClipShape,
    pub preset: Preset,
    pub seed: u64,
    pub runs: usize,
    pub available_cores: usize,
    pub results: Vec<ThreadRun>,
    pub deterministic: bool,
    /// Blur plus warp time at 1 thread over the same at 2 threads.
    pub blur_warp_speedup_2x: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn measure(threads: usize, runs: usize, clip: &tempdeg_core::Clip, recipe: &tempdeg_core::curriculum::RecipeRecord) -> CliResult<ThreadRun> {
    let mut totals = Vec::with_capacity(runs);
    let mut per_stage: Vec<Vec<StageTiming>> = Vec::with_capacity(runs);
    let mut hash = String::new();
    for run in 0..runs {
        let (out, timings) = with_pool(threads, || apply_recipe_timed(clip, recipe))??;
        totals.push(timings.iter().map(|t| t.seconds).sum::<f64>());
        if run == 0 {
            hash = clip_hash(&out);
        }
        per_stage.push(timings);
    }
    let stages = per_stage[0]
        .iter()
        .enumerate()
        .map(|(i, s)| StageTiming {
            stage: s.stage.clone(),
            seconds: median(per_stage.iter().map(|r| r[i].seconds).collect()),
        })
        .collect();
    let seconds = median(totals);
    Ok(ThreadRun {
        threads,
        frames_per_second: clip.len() as f64 / seconds.max(f64::EPSILON),
        seconds,
        stages,
        hash,
    })
}

/// Times the full pipeline on a synthetic clip at each configured pool size.
pub fn run_bench(cfg: &RunConfig) -> CliResult<BenchReport> {
    let shape = ClipShape::new(cfg.frames, cfg.height, cfg.width);
    let preset = cfg.preset.unwrap_or(Preset::Strong);
    let seed = cfg.seed.unwrap_or(0);
    let clip = synthetic_clip(seed, shape)?;
    let recipe = sample_recipe(preset, seed, shape)?;
    let results = cfg
        .thread_counts
        .iter()
        .map(|&t| measure(t, cfg.runs, &clip, &recipe))
        .collect::<CliResult<Vec<_>>>()?;
    let deterministic = results.iter().all(|r| r.hash == results[0].hash);
    let speed = |t: usize| results.iter().find(|r| r.threads == t);
    let blur_warp_speedup_2x = match (speed(1), speed(2)) {
        (Some(a), Some(b)) => {
            let names = ["motion_blur", "grid_warp"];
            let (sa, sb) = (a.stage_seconds(&names), b.stage_seconds(&names));
            (sa > 0.0 && sb > 0.0).then(|| sa / sb)
        }
        _ => None,
    };
    Ok(BenchReport {
        shape,
        preset,
        seed,
        runs: cfg.runs,
        available_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
        results,
        deterministic,
        blur_warp_speedup_2x,
    })
}

pub(crate) fn bench(cfg: &RunConfig) -> CliResult<BenchReport> {
    let report = run_bench(cfg)?;
    println!("seed: {}", report.seed);
    println!(
        "bench: {} {} synthetic clip, median of {} runs, {} cores available",
        report.preset, report.shape, report.runs, report.available_cores
    );
    for r in &report.results {
        let stages: Vec<String> = r.stages.iter().map(|s| format!("{} {:.3}s", s.stage, s.seconds)).collect();
        println!(
            "threads {:>2}: {:>7.2} frames/s  ({:.3} s)  [{}]",
            r.threads,
            r.frames_per_second,
            r.seconds,
            stages.join(", ")
        );
    }
    if let Some(s) = report.blur_warp_speedup_2x {
        println!("blur+warp speedup at 2 threads: {s:.2}x");
    }
    println!("output hash identical across thread counts: {}", report.deterministic);
    if let Some(path) = &cfg.report {
        write_new(path, to_json(&report).as_bytes())?;
    }
    if !report.deterministic {
        return Err(CliError::Nondeterministic("output hash differs between thread counts".into()));
    }
    Ok(report)
}
