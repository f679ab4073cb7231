use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input scores with magnitude at or below this are excluded from relative gains.
pub const GAIN_EPSILON: f64 = 1e-9;

/// `round(k * (T - 1) / (n - 1))` for `k = 0..n`, or `[0]` for `n == 1`.
pub fn uniform_frame_indices(frames: usize, n: usize) -> Result<Vec<usize>> {
    if n == 0 || n > frames {
        return Err(Error::param(format!("cannot sample {n} of {frames} frames")));
    }
    if n == 1 {
        return Ok(vec![0]);
    }
    // Exact integer round-half-up of k(T-1)/(n-1).
    let (span, steps) = (frames - 1, n - 1);
    Ok((0..n).map(|k| (2 * k * span + steps) / (2 * steps)).collect())
}

/// Axis-aligned crop in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl CropBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    fn is_degenerate(&self) -> bool {
        ![self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) || self.w <= 0.0 || self.h <= 0.0
    }
}

/// Grows every side by `fraction` of the box's own extent along that axis, then clamps to the frame.
pub fn expand_box(b: CropBox, fraction: f64, height: usize, width: usize) -> Result<CropBox> {
    if b.is_degenerate() {
        return Err(Error::param(format!("degenerate box {b:?}")));
    }
    if !(fraction.is_finite() && fraction >= 0.0) {
        return Err(Error::param(format!("expansion fraction {fraction} must be >= 0")));
    }
    let (fw, fh) = (width as f64, height as f64);
    let x0 = (b.x - fraction * b.w).clamp(0.0, fw);
    let y0 = (b.y - fraction * b.h).clamp(0.0, fh);
    let x1 = (b.x + b.w + fraction * b.w).clamp(0.0, fw);
    let y1 = (b.y + b.h + fraction * b.h).clamp(0.0, fh);
    if x1 <= x0 || y1 <= y0 {
        return Err(Error::param(format!("box {b:?} lies outside the {width}x{height} frame")));
    }
    Ok(CropBox::new(x0, y0, x1 - x0, y1 - y0))
}

/// Per-crop relative improvement summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gain {
    /// Mean of `100 * (out - in) / |in|` over crops with `|in| > GAIN_EPSILON`.
    pub percent: f64,
    /// Mean of `out - in` over the same crops.
    pub mean_delta: f64,
    pub used: usize,
    pub excluded: usize,
}

pub fn relative_gain(score_in: &[f64], score_out: &[f64]) -> Result<Gain> {
    if score_in.is_empty() || score_in.len() != score_out.len() {
        return Err(Error::param(format!(
            "relative gain needs equal non-empty series, got {} and {}",
            score_in.len(),
            score_out.len()
        )));
    }
    if score_in.iter().chain(score_out).any(|v| !v.is_finite()) {
        return Err(Error::param("relative gain inputs must be finite"));
    }
    let (mut pct, mut delta, mut used) = (0.0, 0.0, 0usize);
    for (&a, &b) in score_in.iter().zip(score_out) {
        if a.abs() > GAIN_EPSILON {
            pct += 100.0 * (b - a) / a.abs();
            delta += b - a;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::UndefinedGain(score_in.len()));
    }
    Ok(Gain {
        percent: pct / used as f64,
        mean_delta: delta / used as f64,
        used,
        excluded: score_in.len() - used,
    })
}

/// Unweighted mean over every cell of a crop-by-frame table.
pub fn aggregate_scores<R: AsRef<[f64]>>(table: &[R]) -> Result<f64> {
    let (sum, count) = table
        .iter()
        .flat_map(|r| r.as_ref())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if count == 0 {
        return Err(Error::param("cannot aggregate an empty score table"));
    }
    Ok(sum / count as f64)
}
