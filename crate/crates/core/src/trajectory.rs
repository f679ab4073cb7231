//! Seeded per-frame parameter series and low-frequency displacement fields.
//!
//! Every random draw comes from a [`Stream`] keyed by `(seed, op_index, purpose)`.
//! Streams share no state, so the order in which operators are resolved, or the
//! thread that resolves them, never changes a value.

use std::borrow::Cow;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::clip::ClipShape;
use crate::error::{Error, Result};

/// Lattice knots per control-point trajectory in a displacement field.
pub const FIELD_LATTICE_POINTS: usize = 4;

const STREAM_DOMAIN: &[u8] = b"tempdeg.stream.v1";

/// A reproducible random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

/// Derives the stream for `(seed, op_index, purpose)`.
///
/// The key is hashed into a ChaCha8 seed, so streams for distinct keys are
/// independent and the same key always yields the same draws.
pub fn derive_stream(seed: u64, op_index: u32, purpose: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(STREAM_DOMAIN);
    hasher.update(seed.to_le_bytes());
    hasher.update(op_index.to_le_bytes());
    hasher.update((purpose.len() as u64).to_le_bytes());
    hasher.update(purpose.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    Stream {
        rng: ChaCha8Rng::from_seed(key),
    }
}

impl Stream {
    /// Uniform draw in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_unit();
        (lo + (hi - lo) * u).clamp(lo, hi)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random::<u64>()
    }
}

/// Shape of the base function a trajectory is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// One sine period every `1 / cycles` clips, with a random phase.
    Sinusoid { cycles: f64 },
    /// Value noise: random knots joined by smoothstep segments.
    LatticeNoise { points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub basis: Basis,
    pub min: f64,
    pub max: f64,
    /// Odd box-filter width applied after the basis; 1 disables smoothing.
    pub smooth_window: usize,
}

impl TrajectorySpec {
    pub fn sinusoid(min: f64, max: f64, cycles: f64, smooth_window: usize) -> Self {
        Self {
            basis: Basis::Sinusoid { cycles },
            min,
            max,
            smooth_window,
        }
    }

    pub fn lattice(min: f64, max: f64, points: usize, smooth_window: usize) -> Self {
        Self {
            basis: Basis::LatticeNoise { points },
            min,
            max,
            smooth_window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::param(format!(
                "trajectory range [{}, {}] is not a finite ordered interval",
                self.min, self.max
            )));
        }
        if self.smooth_window % 2 == 0 {
            return Err(Error::param(format!(
                "smoothing window must be odd, got {}",
                self.smooth_window
            )));
        }
        match self.basis {
            Basis::Sinusoid { cycles } if !cycles.is_finite() => {
                Err(Error::param("sinusoid cycles must be finite"))
            }
            Basis::LatticeNoise { points } if points < 2 => Err(Error::param(format!(
                "lattice noise needs at least 2 knots, got {points}"
            ))),
            _ => Ok(()),
        }
    }
}

/// A length-`T` series of per-frame parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    values: Vec<f64>,
}

impl Trajectory {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(value: f64, frames: usize) -> Self {
        Self {
            values: vec![value; frames],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn require_frames(frames: usize) -> Result<()> {
    if frames == 0 {
        return Err(Error::EmptyClip);
    }
    Ok(())
}

/// `min + (max - min) * (0.5 + 0.5 * sin(2π·cycles·t/T + phase))`.
pub fn sinusoid_values(min: f64, max: f64, cycles: f64, phase: f64, frames: usize) -> Vec<f64> {
    let span = max - min;
    (0..frames)
        .map(|t| {
            let angle = TAU * cycles * t as f64 / frames as f64 + phase;
            (min + span * (0.5 + 0.5 * angle.sin())).clamp(min, max)
        })
        .collect()
}

/// Sinusoid with a single phase drawn from `stream` in `[0, 2π)`.
pub fn gen_sinusoid(spec: &TrajectorySpec, frames: usize, stream: &mut Stream) -> Result<Trajectory> {
    spec.validate()?;
    let Basis::Sinusoid { cycles } = spec.basis else {
        return Err(Error::param("gen_sinusoid needs a sinusoid basis"));
    };
    require_frames(frames)?;
    let phase = stream.next_unit() * TAU;
    Ok(Trajectory::from_values(sinusoid_values(
        spec.min, spec.max, cycles, phase, frames,
    )))
}

/// Smoothstep weight `3s² - 2s³`.
#[inline]
pub fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}

/// Interpolates knot values placed evenly over `[0, frames - 1]` with smoothstep segments.
pub fn lattice_values(knots: &[f64], frames: usize) -> Vec<f64> {
    debug_assert!(knots.len() >= 2);
    let segments = knots.len() - 1;
    (0..frames)
        .map(|t| {
            if frames == 1 {
                return knots[0];
            }
            let s = t as f64 * segments as f64 / (frames - 1) as f64;
            let k = (s.floor() as usize).min(segments - 1);
            let frac = s - k as f64;
            knots[k] + (knots[k + 1] - knots[k]) * smoothstep(frac)
        })
        .collect()
}

/// Value noise with `points` uniform knots, mapped affinely onto `[min, max]`.
pub fn gen_lattice_noise(spec: &TrajectorySpec, frames: usize, stream: &mut Stream) -> Result<Trajectory> {
    spec.validate()?;
    let Basis::LatticeNoise { points } = spec.basis else {
        return Err(Error::param("gen_lattice_noise needs a lattice-noise basis"));
    };
    require_frames(frames)?;
    let knots: Vec<f64> = (0..points).map(|_| stream.next_unit()).collect();
    let span = spec.max - spec.min;
    let values = lattice_values(&knots, frames)
        .into_iter()
        .map(|v| (spec.min + span * v).clamp(spec.min, spec.max))
        .collect();
    Ok(Trajectory::from_values(values))
}

/// Moving average over an odd window with reflect padding (`x[-1] = x[1]`).
pub fn box_smooth(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 {
        return Err(Error::param(format!("box window must be odd, got {window}")));
    }
    if window > series.len() {
        return Err(Error::param(format!(
            "box window {window} exceeds series length {}",
            series.len()
        )));
    }
    if window == 1 {
        return Ok(series.to_vec());
    }
    let n = series.len() as isize;
    let half = (window / 2) as isize;
    let reflect = |i: isize| -> f64 {
        let j = if i < 0 {
            -i
        } else if i >= n {
            2 * (n - 1) - i
        } else {
            i
        };
        series[j as usize]
    };
    Ok((0..n)
        .map(|t| (t - half..=t + half).map(reflect).sum::<f64>() / window as f64)
        .collect())
}

/// The largest usable odd window not exceeding `frames`.
fn effective_window(window: usize, frames: usize) -> usize {
    let cap = if frames % 2 == 1 { frames } else { frames - 1 };
    window.min(cap).max(1)
}

/// Draws the basis named by `spec`, then applies its box smoothing.
///
/// Windows wider than the clip are narrowed to the widest odd window that fits.
pub fn generate(spec: &TrajectorySpec, frames: usize, stream: &mut Stream) -> Result<Trajectory> {
    let raw = match spec.basis {
        Basis::Sinusoid { .. } => gen_sinusoid(spec, frames, stream)?,
        Basis::LatticeNoise { .. } => gen_lattice_noise(spec, frames, stream)?,
    };
    let window = effective_window(spec.smooth_window, frames);
    let smoothed = box_smooth(raw.values(), window)?
        .into_iter()
        .map(|v| v.clamp(spec.min, spec.max))
        .collect();
    Ok(Trajectory::from_values(smoothed))
}

/// Independent uniform draw per frame over the spec's range; the flicker ablation baseline.
pub fn generate_iid(spec: &TrajectorySpec, frames: usize, stream: &mut Stream) -> Result<Trajectory> {
    spec.validate()?;
    require_frames(frames)?;
    Ok(Trajectory::from_values(
        (0..frames).map(|_| stream.uniform(spec.min, spec.max)).collect(),
    ))
}

/// How per-frame parameters evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryMode {
    /// Low-frequency bases plus box smoothing.
    #[default]
    Smooth,
    /// Independent draws per frame (ablation only).
    Iid,
}

/// Per-frame displacement fields `d_t = (dx, dy)` in pixels.
///
/// Generated fields keep only their control lattice; each dense `H x W x 2`
/// field is upsampled on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementFieldSeq {
    shape: ClipShape,
    repr: FieldRepr,
}

#[derive(Debug, Clone, PartialEq)]
enum FieldRepr {
    Control {
        grid_h: usize,
        grid_w: usize,
        /// Pixels per unit of control value.
        scale: f64,
        /// `T x grid_h x grid_w x 2`, normalized to `[-1, 1]`.
        control: Vec<f64>,
    },
    Dense(Vec<Vec<f32>>),
}

impl DisplacementFieldSeq {
    /// Fields from a normalized control lattice, `T x grid_h x grid_w x 2`
    /// values in `[-1, 1]` scaled by `scale` pixels.
    pub fn from_control(
        shape: ClipShape,
        grid_h: usize,
        grid_w: usize,
        scale: f64,
        control: Vec<f64>,
    ) -> Result<Self> {
        if grid_h < 2 || grid_w < 2 {
            return Err(Error::param(format!(
                "control grid must be at least 2x2, got {grid_h}x{grid_w}"
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::param(format!("field scale {scale} must be finite and >= 0")));
        }
        let expected = shape
            .frames
            .checked_mul(grid_h)
            .and_then(|n| n.checked_mul(grid_w))
            .and_then(|n| n.checked_mul(2));
        if expected != Some(control.len()) {
            return Err(Error::param(format!(
                "control lattice holds {} values, expected {} frames x {grid_h} x {grid_w} x 2",
                control.len(),
                shape.frames
            )));
        }
        if let Some(v) = control.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("control value {v} outside [-1, 1]")));
        }
        Ok(Self {
            shape,
            repr: FieldRepr::Control {
                grid_h,
                grid_w,
                scale,
                control,
            },
        })
    }

    /// Fields given densely, one `H x W x 2` interleaved `(dx, dy)` buffer per frame.
    pub fn from_dense(shape: ClipShape, fields: Vec<Vec<f32>>) -> Result<Self> {
        if fields.len() != shape.frames {
            return Err(Error::param(format!(
                "{} fields for {} frames",
                fields.len(),
                shape.frames
            )));
        }
        let len = shape.height * shape.width * 2;
        if let Some(bad) = fields.iter().find(|f| f.len() != len) {
            return Err(Error::param(format!(
                "dense field holds {} values, expected {len}",
                bad.len()
            )));
        }
        if fields.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("dense field holds a non-finite displacement"));
        }
        Ok(Self {
            shape,
            repr: FieldRepr::Dense(fields),
        })
    }

    pub fn shape(&self) -> ClipShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.frames
    }

    pub fn is_empty(&self) -> bool {
        self.shape.frames == 0
    }

    /// The dense `H x W x 2` field of frame `t`.
    pub fn frame_field(&self, t: usize) -> Cow<'_, [f32]> {
        match &self.repr {
            FieldRepr::Dense(fields) => Cow::Borrowed(&fields[t]),
            FieldRepr::Control {
                grid_h,
                grid_w,
                scale,
                control,
            } => {
                let per_frame = grid_h * grid_w * 2;
                let lattice = &control[t * per_frame..(t + 1) * per_frame];
                Cow::Owned(upsample_lattice(
                    lattice,
                    *grid_h,
                    *grid_w,
                    *scale,
                    self.shape.height,
                    self.shape.width,
                ))
            }
        }
    }
}

/// Align-corners linear weights mapping `n` output positions onto `knots` control points.
fn axis_weights(n: usize, knots: usize) -> Vec<(usize, f64)> {
    (0..n)
        .map(|p| {
            if n == 1 {
                return (0, 0.0);
            }
            let g = p as f64 * (knots - 1) as f64 / (n - 1) as f64;
            let k = (g.floor() as usize).min(knots - 2);
            (k, g - k as f64)
        })
        .collect()
}

/// Bilinear upsampling of a `gh x gw x 2` lattice onto `height x width x 2`.
fn upsample_lattice(lattice: &[f64], gh: usize, gw: usize, scale: f64, height: usize, width: usize) -> Vec<f32> {
    let rows = axis_weights(height, gh);
    let cols = axis_weights(width, gw);
    let at = |i: usize, j: usize, c: usize| lattice[(i * gw + j) * 2 + c];
    let mut out = Vec::with_capacity(height * width * 2);
    for &(i, fy) in &rows {
        // Interpolate the two bracketing lattice rows along y once per output row.
        let row: Vec<[f64; 2]> = (0..gw)
            .map(|j| {
                let mut v = [0.0; 2];
                for (c, slot) in v.iter_mut().enumerate() {
                    *slot = at(i, j, c) * (1.0 - fy) + at(i + 1, j, c) * fy;
                }
                v
            })
            .collect();
        for &(j, fx) in &cols {
            for (a, b) in row[j].iter().zip(&row[j + 1]) {
                out.push(((a * (1.0 - fx) + b * fx) * scale) as f32);
            }
        }
    }
    out
}

/// Control-lattice trajectories for a displacement field: `T x grid_h x grid_w x 2`
/// values in `[-1, 1]`, one lattice-noise trajectory per control point and channel.
pub fn gen_control_lattice(
    stream: &mut Stream,
    grid_h: usize,
    grid_w: usize,
    frames: usize,
    smooth_window: usize,
    mode: TrajectoryMode,
) -> Result<Vec<f64>> {
    if grid_h < 2 || grid_w < 2 {
        return Err(Error::param(format!(
            "control grid must be at least 2x2, got {grid_h}x{grid_w}"
        )));
    }
    require_frames(frames)?;
    let spec = TrajectorySpec::lattice(-1.0, 1.0, FIELD_LATTICE_POINTS, smooth_window);
    let mut control = vec![0.0; frames * grid_h * grid_w * 2];
    for c in 0..2 {
        for i in 0..grid_h {
            for j in 0..grid_w {
                let traj = match mode {
                    TrajectoryMode::Smooth => generate(&spec, frames, stream)?,
                    TrajectoryMode::Iid => generate_iid(&spec, frames, stream)?,
                };
                for (t, v) in traj.values().iter().enumerate() {
                    control[((t * grid_h + i) * grid_w + j) * 2 + c] = *v;
                }
            }
        }
    }
    Ok(control)
}

/// Smooth displacement fields with per-channel magnitude at most `amplitude * min(H, W)` pixels.
#[allow(clippy::too_many_arguments)]
pub fn gen_field_seq(
    stream: &mut Stream,
    grid_h: usize,
    grid_w: usize,
    amplitude: f64,
    frames: usize,
    height: usize,
    width: usize,
    smooth_window: usize,
) -> Result<DisplacementFieldSeq> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::param(format!("warp amplitude {amplitude} must be >= 0")));
    }
    let control = gen_control_lattice(stream, grid_h, grid_w, frames, smooth_window, TrajectoryMode::Smooth)?;
    let scale = amplitude * height.min(width) as f64;
    DisplacementFieldSeq::from_control(
        ClipShape::new(frames, height, width),
        grid_h,
        grid_w,
        scale,
        control,
    )
}
