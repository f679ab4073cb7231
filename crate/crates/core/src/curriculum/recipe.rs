use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::preset::{bounds, preset_spec, Preset, PresetSpec};
use crate::clip::{Clip, ClipShape};
use crate::degrade::{
    apply_drop, grid_warp, motion_blur, sample_drop_mask, spatial_resample, temporal_morph, temporal_resample,
    DropMask,
};
use crate::error::{Error, Result};
use crate::trajectory::{
    derive_stream, gen_control_lattice, generate, generate_iid, DisplacementFieldSeq, Trajectory, TrajectoryMode,
    TrajectorySpec,
};

pub const RECIPE_VERSION: u32 = 1;

/// Temporal operators a preset draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    MotionBlur,
    GridWarp,
    TemporalMorph,
    FrameDrop,
    TemporalDownsample,
}

impl OperatorKind {
    pub const POOL: [OperatorKind; 5] = [
        OperatorKind::MotionBlur,
        OperatorKind::GridWarp,
        OperatorKind::TemporalMorph,
        OperatorKind::FrameDrop,
        OperatorKind::TemporalDownsample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::MotionBlur => "motion_blur",
            OperatorKind::GridWarp => "grid_warp",
            OperatorKind::TemporalMorph => "temporal_morph",
            OperatorKind::FrameDrop => "frame_drop",
            OperatorKind::TemporalDownsample => "temporal_downsample",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialMethod {
    /// Area-average down, bilinear up.
    AreaBilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialStage {
    pub method: SpatialMethod,
    pub factor: f64,
}

/// One fully resolved temporal operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalOp {
    MotionBlur {
        theta_deg: Vec<f64>,
        length_px: Vec<f64>,
    },
    GridWarp {
        grid_h: usize,
        grid_w: usize,
        /// Fraction of `min(H, W)`.
        amplitude: f64,
        /// `T x grid_h x grid_w x 2` normalized control values in `[-1, 1]`.
        control: Vec<f64>,
    },
    TemporalMorph {
        strength: f64,
        alpha: Vec<f64>,
    },
    FrameDrop {
        p_drop: f64,
        max_run: usize,
        keep: Vec<bool>,
    },
    TemporalDownsample {
        factor: f64,
    },
}

impl TemporalOp {
    pub fn kind(&self) -> OperatorKind {
        match self {
            TemporalOp::MotionBlur { .. } => OperatorKind::MotionBlur,
            TemporalOp::GridWarp { .. } => OperatorKind::GridWarp,
            TemporalOp::TemporalMorph { .. } => OperatorKind::TemporalMorph,
            TemporalOp::FrameDrop { .. } => OperatorKind::FrameDrop,
            TemporalOp::TemporalDownsample { .. } => OperatorKind::TemporalDownsample,
        }
    }

    fn floats_mut(&mut self) -> Vec<&mut f64> {
        match self {
            TemporalOp::MotionBlur {
                theta_deg,
                length_px,
            } => theta_deg.iter_mut().chain(length_px.iter_mut()).collect(),
            TemporalOp::GridWarp {
                amplitude, control, ..
            } => std::iter::once(amplitude).chain(control.iter_mut()).collect(),
            TemporalOp::TemporalMorph { strength, alpha } => std::iter::once(strength).chain(alpha.iter_mut()).collect(),
            TemporalOp::FrameDrop { p_drop, .. } => vec![p_drop],
            TemporalOp::TemporalDownsample { factor } => vec![factor],
        }
    }

    fn validate(&self, shape: ClipShape) -> Result<()> {
        let t = shape.frames;
        let per_frame = |name: &str, len: usize| {
            if len != t {
                Err(Error::Recipe(format!("{name} has {len} values for {t} frames")))
            } else {
                Ok(())
            }
        };
        match self {
            TemporalOp::MotionBlur {
                theta_deg,
                length_px,
            } => {
                per_frame("theta_deg", theta_deg.len())?;
                per_frame("length_px", length_px.len())?;
                if theta_deg.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Recipe("blur orientation must be finite".into()));
                }
                // Guards against absurd kernels from hand-edited records.
                if let Some(l) = length_px.iter().find(|l| !(1.0..=MAX_BLUR_LENGTH).contains(*l)) {
                    return Err(Error::Recipe(format!(
                        "blur length {l} outside [1, {MAX_BLUR_LENGTH}]"
                    )));
                }
            }
            TemporalOp::GridWarp {
                grid_h,
                grid_w,
                amplitude,
                control,
            } => {
                if *grid_h < 2 || *grid_w < 2 || *grid_h > MAX_GRID || *grid_w > MAX_GRID {
                    return Err(Error::Recipe(format!(
                        "warp grid {grid_h}x{grid_w} outside 2..={MAX_GRID}"
                    )));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0 && *amplitude <= 1.0) {
                    return Err(Error::Recipe(format!("warp amplitude {amplitude} outside [0, 1]")));
                }
                let expected = t.checked_mul(grid_h * grid_w * 2);
                if expected != Some(control.len()) {
                    return Err(Error::Recipe(format!(
                        "warp control lattice has {} values, expected {t} x {grid_h} x {grid_w} x 2",
                        control.len()
                    )));
                }
                if control.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                    return Err(Error::Recipe("warp control value outside [-1, 1]".into()));
                }
            }
            TemporalOp::TemporalMorph { strength, alpha } => {
                per_frame("alpha", alpha.len())?;
                if !(0.0..=1.0).contains(strength) {
                    return Err(Error::Recipe(format!("morph strength {strength} outside [0, 1]")));
                }
                if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(Error::Recipe("morph weight outside [0, 1]".into()));
                }
            }
            TemporalOp::FrameDrop { p_drop, max_run, keep } => {
                per_frame("keep", keep.len())?;
                if !(0.0..1.0).contains(p_drop) || *max_run < 1 {
                    return Err(Error::Recipe(format!(
                        "frame drop p={p_drop} max_run={max_run} is invalid"
                    )));
                }
                let mask = DropMask::new(keep.clone()).map_err(|e| Error::Recipe(e.to_string()))?;
                if mask.longest_drop_run() > *max_run {
                    return Err(Error::Recipe(format!(
                        "drop mask has a run of {} above max_run {max_run}",
                        mask.longest_drop_run()
                    )));
                }
            }
            TemporalOp::TemporalDownsample { factor } => {
                if !(factor.is_finite() && *factor >= 1.0) {
                    return Err(Error::Recipe(format!("temporal factor {factor} below 1")));
                }
            }
        }
        Ok(())
    }
}

const MAX_BLUR_LENGTH: f64 = 256.0;
const MAX_GRID: usize = 256;

/// A fully resolved degradation plan: the spatial stage, then temporal
/// operators in order. Applying it to a clip of `shape` is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeRecord {
    pub version: u32,
    pub seed: u64,
    pub preset: Preset,
    pub shape: ClipShape,
    pub spatial: SpatialStage,
    pub temporal_ops: Vec<TemporalOp>,
}

/// Rounds to 9 significant decimal digits.
///
/// Every float in a sampled recipe is stored rounded, so the canonical JSON
/// text parses back to exactly the values that produced the degraded clip.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

impl RecipeRecord {
    /// No-op recipe: unit spatial factor and no temporal operators.
    pub fn identity(seed: u64, preset: Preset, shape: ClipShape) -> Self {
        Self {
            version: RECIPE_VERSION,
            seed,
            preset,
            shape,
            spatial: SpatialStage {
                method: SpatialMethod::AreaBilinear,
                factor: 1.0,
            },
            temporal_ops: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != RECIPE_VERSION {
            return Err(Error::Recipe(format!("unsupported recipe version {}", self.version)));
        }
        let s = self.shape;
        if s.frames == 0 || s.height == 0 || s.width == 0 {
            return Err(Error::Recipe(format!("degenerate shape {s}")));
        }
        if !(self.spatial.factor.is_finite() && self.spatial.factor >= 1.0) {
            return Err(Error::Recipe(format!("spatial factor {} below 1", self.spatial.factor)));
        }
        for op in &self.temporal_ops {
            op.validate(s)?;
        }
        Ok(())
    }

    pub fn operator_kinds(&self) -> Vec<OperatorKind> {
        self.temporal_ops.iter().map(TemporalOp::kind).collect()
    }

    /// Rounds every float to 9 significant digits.
    pub fn canonicalize(&mut self) {
        self.spatial.factor = quantize(self.spatial.factor);
        for op in &mut self.temporal_ops {
            for v in op.floats_mut() {
                *v = quantize(*v);
            }
        }
    }

    /// Compact JSON with fixed key order and floats rounded to 9 significant digits.
    pub fn to_canonical_json(&self) -> String {
        let mut canonical = self.clone();
        canonical.canonicalize();
        // Serializing plain data structs and enums cannot fail.
        let mut text = serde_json::to_string(&canonical).expect("recipe serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text).map_err(|e| Error::Recipe(e.to_string()))?;
        record.validate()?;
        Ok(record)
    }

    /// Lists every parameter that falls outside this record's preset table or the global bounds.
    pub fn audit(&self) -> Vec<String> {
        let spec = preset_spec(self.preset);
        let mut out = Vec::new();
        let mut check = |ok: bool, what: String| {
            if !ok {
                out.push(what);
            }
        };
        check(
            self.temporal_ops.len() == spec.temporal_op_count,
            format!("{} temporal ops, preset uses {}", self.temporal_ops.len(), spec.temporal_op_count),
        );
        let mut kinds = self.operator_kinds();
        kinds.sort();
        kinds.dedup();
        check(kinds.len() == self.temporal_ops.len(), "repeated temporal operator".into());
        check(
            spec.s_spat.contains(self.spatial.factor),
            format!("spatial factor {} outside {:?}", self.spatial.factor, spec.s_spat),
        );
        for op in &self.temporal_ops {
            match op {
                TemporalOp::MotionBlur {
                    theta_deg,
                    length_px,
                } => {
                    for &th in theta_deg {
                        check((0.0..360.0).contains(&th), format!("blur orientation {th} outside [0, 360)"));
                    }
                    for &l in length_px {
                        check(
                            spec.blur_length_px.contains(l) && l <= bounds::BLUR_LENGTH_PX.1,
                            format!("blur length {l} outside {:?}", spec.blur_length_px),
                        );
                    }
                }
                TemporalOp::GridWarp {
                    grid_h,
                    grid_w,
                    amplitude,
                    ..
                } => {
                    let (g0, g1) = spec.grid_points;
                    check(
                        grid_h == grid_w && (g0..=g1).contains(grid_h),
                        format!("warp grid {grid_h}x{grid_w} outside {g0}..{g1}"),
                    );
                    check(
                        spec.warp_amplitude.contains(*amplitude) && *amplitude <= bounds::WARP_AMPLITUDE.1,
                        format!("warp amplitude {amplitude} outside {:?}", spec.warp_amplitude),
                    );
                }
                TemporalOp::TemporalMorph { strength, alpha } => {
                    check(
                        spec.morph_strength.contains(*strength) && *strength <= bounds::MORPH_STRENGTH_MAX,
                        format!("morph strength {strength} outside {:?}", spec.morph_strength),
                    );
                    for &a in alpha {
                        check(
                            a >= 1.0 - strength - 1e-12 && a <= 1.0,
                            format!("morph weight {a} outside [1 - {strength}, 1]"),
                        );
                    }
                }
                TemporalOp::FrameDrop { p_drop, max_run, keep } => {
                    check(
                        spec.p_drop.contains(*p_drop),
                        format!("drop probability {p_drop} outside {:?}", spec.p_drop),
                    );
                    check(*max_run == spec.max_run, format!("max_run {max_run} != {}", spec.max_run));
                    let longest = keep.split(|&k| k).map(<[bool]>::len).max().unwrap_or(0);
                    check(longest <= spec.max_run, format!("drop run {longest} above {}", spec.max_run));
                }
                TemporalOp::TemporalDownsample { factor } => {
                    check(
                        spec.s_temp.contains(*factor) && *factor <= bounds::TEMPORAL_FACTOR.1,
                        format!("temporal factor {factor} outside {:?}", spec.s_temp),
                    );
                }
            }
        }
        out
    }
}

fn ordered_pair(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn draw(spec: &TrajectorySpec, frames: usize, seed: u64, op_index: u32, purpose: &str, mode: TrajectoryMode) -> Result<Vec<f64>> {
    let mut stream = derive_stream(seed, op_index, purpose);
    let traj = match mode {
        TrajectoryMode::Smooth => generate(spec, frames, &mut stream)?,
        TrajectoryMode::Iid => generate_iid(spec, frames, &mut stream)?,
    };
    Ok(traj.into_values())
}

/// Resolves every parameter of one operator from streams keyed by `(seed, op_index, purpose)`.
///
/// `mode` selects smooth trajectories or the i.i.d. per-frame ablation.
pub fn resolve_op(
    kind: OperatorKind,
    spec: &PresetSpec,
    seed: u64,
    op_index: u32,
    shape: ClipShape,
    mode: TrajectoryMode,
) -> Result<TemporalOp> {
    let frames = shape.frames;
    let mut op = match kind {
        OperatorKind::MotionBlur => {
            let mut base = derive_stream(seed, op_index, "blur.base");
            let center = base.uniform(0.0, 360.0);
            let (l0, l1) = ordered_pair(
                base.uniform(spec.blur_length_px.lo, spec.blur_length_px.hi),
                base.uniform(spec.blur_length_px.lo, spec.blur_length_px.hi),
            );
            let theta_spec = TrajectorySpec::lattice(
                center - spec.blur_wobble_deg,
                center + spec.blur_wobble_deg,
                spec.lattice_points,
                spec.smooth_window,
            );
            let length_spec = TrajectorySpec::sinusoid(l0, l1, spec.sinusoid_cycles, spec.smooth_window);
            TemporalOp::MotionBlur {
                theta_deg: draw(&theta_spec, frames, seed, op_index, "blur.theta", mode)?,
                length_px: draw(&length_spec, frames, seed, op_index, "blur.length", mode)?,
            }
        }
        OperatorKind::GridWarp => {
            let mut base = derive_stream(seed, op_index, "warp.base");
            let n = base.int_inclusive(spec.grid_points.0, spec.grid_points.1);
            let amplitude = base.uniform(spec.warp_amplitude.lo, spec.warp_amplitude.hi);
            let mut field = derive_stream(seed, op_index, "warp.field");
            let control = gen_control_lattice(&mut field, n, n, frames, spec.smooth_window, mode)?;
            TemporalOp::GridWarp {
                grid_h: n,
                grid_w: n,
                amplitude,
                control,
            }
        }
        OperatorKind::TemporalMorph => {
            let mut base = derive_stream(seed, op_index, "morph.base");
            let strength = quantize(base.uniform(spec.morph_strength.lo, spec.morph_strength.hi));
            let alpha_spec = TrajectorySpec::sinusoid(1.0 - strength, 1.0, spec.sinusoid_cycles, spec.smooth_window);
            TemporalOp::TemporalMorph {
                strength,
                alpha: draw(&alpha_spec, frames, seed, op_index, "morph.alpha", mode)?,
            }
        }
        OperatorKind::FrameDrop => {
            let mut base = derive_stream(seed, op_index, "drop.base");
            let p_drop = quantize(base.uniform(spec.p_drop.lo, spec.p_drop.hi));
            let mut mask_stream = derive_stream(seed, op_index, "drop.mask");
            let mask = sample_drop_mask(&mut mask_stream, frames, p_drop, spec.max_run)?;
            TemporalOp::FrameDrop {
                p_drop,
                max_run: spec.max_run,
                keep: mask.keep().to_vec(),
            }
        }
        OperatorKind::TemporalDownsample => {
            let mut base = derive_stream(seed, op_index, "downsample.base");
            TemporalOp::TemporalDownsample {
                factor: base.uniform(spec.s_temp.lo, spec.s_temp.hi),
            }
        }
    };
    for v in op.floats_mut() {
        *v = quantize(*v);
    }
    if let TemporalOp::MotionBlur { theta_deg, .. } = &mut op {
        for th in theta_deg.iter_mut() {
            *th = quantize(th.rem_euclid(360.0));
            if *th >= 360.0 {
                *th = 0.0;
            }
        }
    }
    Ok(op)
}

/// Samples a concrete recipe for `preset`, deterministic in `(preset, seed, shape)`.
///
/// Draws `temporal_op_count` distinct operators from the pool without
/// replacement; they apply in draw order after the spatial stage.
pub fn sample_recipe(preset: Preset, seed: u64, shape: ClipShape) -> Result<RecipeRecord> {
    if shape.frames < 2 {
        return Err(Error::param(format!("recipes need T >= 2, got {}", shape.frames)));
    }
    if shape.height == 0 || shape.width == 0 {
        return Err(Error::param(format!("degenerate shape {shape}")));
    }
    let spec = preset_spec(preset);
    let mut spatial = derive_stream(seed, 0, "spatial");
    let factor = quantize(spatial.uniform(spec.s_spat.lo, spec.s_spat.hi));

    let mut select = derive_stream(seed, 0, "select");
    let mut pool = OperatorKind::POOL;
    let count = spec.temporal_op_count.min(pool.len());
    for i in 0..count {
        let j = select.int_inclusive(i, pool.len() - 1);
        pool.swap(i, j);
    }
    let temporal_ops = pool[..count]
        .iter()
        .enumerate()
        .map(|(slot, &kind)| resolve_op(kind, &spec, seed, slot as u32 + 1, shape, TrajectoryMode::Smooth))
        .collect::<Result<Vec<_>>>()?;

    Ok(RecipeRecord {
        version: RECIPE_VERSION,
        seed,
        preset,
        shape,
        spatial: SpatialStage {
            method: SpatialMethod::AreaBilinear,
            factor,
        },
        temporal_ops,
    })
}

/// Wall time spent in one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

fn apply_op(clip: &Clip, op: &TemporalOp) -> Result<Clip> {
    match op {
        TemporalOp::MotionBlur {
            theta_deg,
            length_px,
        } => motion_blur(
            clip,
            &Trajectory::from_values(theta_deg.clone()),
            &Trajectory::from_values(length_px.clone()),
        ),
        TemporalOp::GridWarp {
            grid_h,
            grid_w,
            amplitude,
            control,
        } => {
            let scale = amplitude * clip.height().min(clip.width()) as f64;
            let fields = DisplacementFieldSeq::from_control(clip.shape(), *grid_h, *grid_w, scale, control.clone())?;
            grid_warp(clip, &fields)
        }
        TemporalOp::TemporalMorph { alpha, .. } => temporal_morph(clip, &Trajectory::from_values(alpha.clone())),
        TemporalOp::FrameDrop { keep, .. } => apply_drop(clip, &DropMask::new(keep.clone())?),
        TemporalOp::TemporalDownsample { factor } => temporal_resample(clip, *factor),
    }
}

fn run_stages(clip: &Clip, recipe: &RecipeRecord, mut observe: impl FnMut(&str, Duration)) -> Result<Clip> {
    recipe.validate()?;
    clip.expect_shape(recipe.shape, "recipe")?;
    let start = Instant::now();
    let mut current = spatial_resample(clip, recipe.spatial.factor)?;
    observe("spatial", start.elapsed());
    for op in &recipe.temporal_ops {
        let start = Instant::now();
        current = apply_op(&current, op)?;
        observe(op.kind().name(), start.elapsed());
    }
    Ok(current)
}

/// Applies the spatial stage, then each temporal operator in recorded order.
pub fn apply_recipe(clip: &Clip, recipe: &RecipeRecord) -> Result<Clip> {
    run_stages(clip, recipe, |_, _| {})
}

/// [`apply_recipe`] plus per-stage wall times.
pub fn apply_recipe_timed(clip: &Clip, recipe: &RecipeRecord) -> Result<(Clip, Vec<StageTiming>)> {
    let mut timings = Vec::new();
    let out = run_stages(clip, recipe, |stage, d| {
        timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: d.as_secs_f64(),
        })
    })?;
    Ok((out, timings))
}

/// Samples a recipe for this clip and applies it.
pub fn degrade(clip: &Clip, preset: Preset, seed: u64) -> Result<(Clip, RecipeRecord)> {
    let recipe = sample_recipe(preset, seed, clip.shape())?;
    let out = apply_recipe(clip, &recipe)?;
    Ok((out, recipe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Frame;

    fn shape() -> ClipShape {
        ClipShape::new(12, 16, 20)
    }

    fn clip() -> Clip {
        let s = shape();
        Clip::new(
            (0..s.frames)
                .map(|t| {
                    Frame::from_fn(s.height, s.width, |x, y| {
                        let v = (((x + 2 * t) / 3 + y / 4) % 2) as f32;
                        [v, 0.5 * v + 0.25, 1.0 - v]
                    })
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn quantize_keeps_nine_digits() {
        assert_eq!(quantize(0.123456789123), 0.123456789);
        assert_eq!(quantize(20.0), 20.0);
        assert_eq!(quantize(0.3), 0.3);
        assert_eq!(quantize(-1.0), -1.0);
        assert_eq!(quantize(359.99999999999), 360.0);
        let q = quantize(std::f64::consts::PI);
        assert_eq!(quantize(q), q);
    }

    #[test]
    fn sampling_is_deterministic() {
        for preset in Preset::ALL {
            let a = sample_recipe(preset, 7, shape()).unwrap();
            let b = sample_recipe(preset, 7, shape()).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, sample_recipe(preset, 8, shape()).unwrap());
        }
    }

    #[test]
    fn light_recipes_use_two_distinct_operators() {
        for seed in 0..1000 {
            let r = sample_recipe(Preset::Light, seed, ClipShape::new(8, 4, 4)).unwrap();
            let mut kinds = r.operator_kinds();
            assert_eq!(kinds.len(), 2);
            kinds.dedup();
            assert_eq!(kinds.len(), 2);
        }
    }

    #[test]
    fn sampled_recipes_pass_their_audit() {
        for preset in Preset::ALL {
            for seed in 0..200 {
                let r = sample_recipe(preset, seed, shape()).unwrap();
                assert_eq!(r.audit(), Vec::<String>::new(), "{preset} seed {seed}");
                r.validate().unwrap();
            }
        }
    }

    #[test]
    fn short_clips_are_rejected() {
        assert!(sample_recipe(Preset::Light, 0, ClipShape::new(1, 4, 4)).is_err());
    }

    #[test]
    fn identity_recipe_is_identity() {
        let c = clip();
        let r = RecipeRecord::identity(0, Preset::Light, c.shape());
        assert_eq!(apply_recipe(&c, &r).unwrap(), c);
    }

    #[test]
    fn degrade_equals_replay() {
        let c = clip();
        for preset in Preset::ALL {
            let (out, record) = degrade(&c, preset, 99).unwrap();
            assert_eq!(out.shape(), c.shape());
            assert_eq!(apply_recipe(&c, &record).unwrap(), out);
            assert_eq!(apply_recipe(&c, &record).unwrap(), out);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        for preset in Preset::ALL {
            let record = sample_recipe(preset, 3, shape()).unwrap();
            let text = record.to_canonical_json();
            let back = RecipeRecord::from_json(&text).unwrap();
            assert_eq!(back, record);
            assert_eq!(back.to_canonical_json(), text);
        }
    }

    #[test]
    fn json_keys_are_stable() {
        let text = RecipeRecord::identity(5, Preset::Strong, ClipShape::new(2, 3, 4)).to_canonical_json();
        assert_eq!(
            text,
            "{\"version\":1,\"seed\":5,\"preset\":\"strong\",\"shape\":{\"frames\":2,\"height\":3,\"width\":4},\
             \"spatial\":{\"method\":\"area_bilinear\",\"factor\":1.0},\"temporal_ops\":[]}\n"
        );
    }

    #[test]
    fn malformed_records_are_rejected() {
        let good = sample_recipe(Preset::Strong, 1, shape()).unwrap();
        let mut bad = good.clone();
        bad.shape.frames = 11;
        assert!(RecipeRecord::from_json(&bad.to_canonical_json()).is_err());
        assert!(RecipeRecord::from_json("{}").is_err());
        assert!(RecipeRecord::from_json("not json").is_err());
        let mut extra: serde_json::Value = serde_json::from_str(&good.to_canonical_json()).unwrap();
        extra["surprise"] = serde_json::Value::Bool(true);
        assert!(RecipeRecord::from_json(&extra.to_string()).is_err());
    }

    #[test]
    fn shape_mismatch_on_apply() {
        let c = clip();
        let r = RecipeRecord::identity(0, Preset::Light, ClipShape::new(3, 4, 4));
        assert!(matches!(apply_recipe(&c, &r), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn timed_apply_reports_every_stage() {
        let c = clip();
        let r = sample_recipe(Preset::Strong, 4, c.shape()).unwrap();
        let (out, timings) = apply_recipe_timed(&c, &r).unwrap();
        assert_eq!(out, apply_recipe(&c, &r).unwrap());
        assert_eq!(timings.len(), 1 + r.temporal_ops.len());
        assert_eq!(timings[0].stage, "spatial");
    }
}
