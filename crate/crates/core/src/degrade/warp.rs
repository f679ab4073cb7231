//! Backward warping through per-frame displacement fields.

use rayon::prelude::*;

use crate::clip::{Clip, Frame, CHANNELS};
use crate::error::{Error, Result};
use crate::trajectory::DisplacementFieldSeq;

/// Clamps a source coordinate to `[0, max]`, mapping NaN to 0.
#[inline(always)]
fn clamp_coord(v: f32, max: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, max)
    }
}

#[inline(always)]
fn pixel_at(row: &[f32], x: usize) -> [f32; 3] {
    let p = &row[x * CHANNELS..x * CHANNELS + CHANNELS];
    [p[0], p[1], p[2]]
}

#[inline(always)]
fn sample_into(data: &[f32], h: usize, w: usize, x: f32, y: f32, out: &mut [f32]) {
    let x = clamp_coord(x, (w - 1) as f32);
    let y = clamp_coord(y, (h - 1) as f32);
    // Truncation is floor for the non-negative clamped coordinates.
    let (x0, y0) = (x as usize, y as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f32, y - y0 as f32);
    let stride = w * CHANNELS;
    let top = &data[y0 * stride..(y0 + 1) * stride];
    let bottom = &data[y1 * stride..(y1 + 1) * stride];
    let (p00, p01) = (pixel_at(top, x0), pixel_at(top, x1));
    let (p10, p11) = (pixel_at(bottom, x0), pixel_at(bottom, x1));
    let out = &mut out[..CHANNELS];
    for c in 0..CHANNELS {
        let t = p00[c] + (p01[c] - p00[c]) * fx;
        let b = p10[c] + (p11[c] - p10[c]) * fx;
        out[c] = (t + (b - t) * fy).clamp(0.0, 1.0);
    }
}

/// Bilinear lookup at `(x, y)` with coordinates clamped to `[0, W−1] × [0, H−1]`.
#[inline]
pub fn bilinear_sample(frame: &Frame, x: f32, y: f32) -> [f32; 3] {
    let mut out = [0.0f32; 3];
    sample_into(frame.data(), frame.height(), frame.width(), x, y, &mut out);
    out
}

fn warp_frame(frame: &Frame, field: &[f32]) -> Frame {
    let (h, w) = (frame.height(), frame.width());
    let data = frame.data();
    let mut out = vec![0.0f32; h * w * CHANNELS];
    for (y, (dst, row)) in out
        .chunks_exact_mut(w * CHANNELS)
        .zip(field.chunks_exact(w * 2))
        .enumerate()
    {
        for (x, (px, d)) in dst.chunks_exact_mut(CHANNELS).zip(row.chunks_exact(2)).enumerate() {
            sample_into(data, h, w, x as f32 + d[0], y as f32 + d[1], px);
        }
    }
    Frame::from_parts(h, w, out)
}

/// `Y_t(u) = X_t(u + d_t(u))`, sampled bilinearly with edge clamping.
pub fn grid_warp(clip: &Clip, fields: &DisplacementFieldSeq) -> Result<Clip> {
    if fields.shape() != clip.shape() {
        return Err(Error::param(format!(
            "displacement fields are {}, clip is {}",
            fields.shape(),
            clip.shape()
        )));
    }
    let frames = clip
        .frames()
        .par_iter()
        .enumerate()
        .map(|(t, frame)| warp_frame(frame, &fields.frame_field(t)))
        .collect();
    Ok(Clip::from_frames(frames))
}
