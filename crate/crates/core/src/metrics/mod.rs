//! Full-reference quality metrics and evaluation-protocol helpers.

mod protocol;
mod sidecar;

use rayon::prelude::*;
use serde::Serialize;

pub use protocol::{aggregate_scores, expand_box, relative_gain, uniform_frame_indices, CropBox, Gain, GAIN_EPSILON};
pub use sidecar::{metric_gains, pair_sidecars, parse_sidecar, CropScores, PairedCrop, SidecarEntry};

use crate::clip::{Clip, Frame, CHANNELS};
use crate::error::{Error, Result};

/// Value reported for frames with zero squared error.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Per-frame values of one metric and their mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric: String,
    pub units: String,
    pub per_frame: Vec<f64>,
    pub mean: f64,
}

impl MetricReport {
    fn new(metric: &str, units: &str, per_frame: Vec<f64>) -> Self {
        let mean = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
        Self {
            metric: metric.to_string(),
            units: units.to_string(),
            per_frame,
            mean,
        }
    }
}

fn same_shape(a: &Clip, b: &Clip) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::mismatch(format!("reference is {}, test is {}", a.shape(), b.shape())));
    }
    Ok(())
}

/// Mean squared difference over all pixels and channels.
pub fn frame_mse(a: &Frame, b: &Frame) -> f64 {
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    sum / a.data().len() as f64
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
    }
}

/// Per-frame PSNR in dB for unit peak signal, capped at [`PSNR_CAP_DB`].
pub fn psnr(reference: &Clip, test: &Clip) -> Result<MetricReport> {
    same_shape(reference, test)?;
    let per_frame = reference
        .frames()
        .par_iter()
        .zip(test.frames().par_iter())
        .map(|(a, b)| psnr_from_mse(frame_mse(a, b)))
        .collect();
    Ok(MetricReport::new("psnr", "dB", per_frame))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// Rec.601 luma plane.
pub fn luma(frame: &Frame) -> Vec<f64> {
    frame
        .data()
        .chunks_exact(CHANNELS)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Separable valid-mode filtering: `(h - k + 1) x (w - k + 1)` output.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut horiz = vec![0.0; h * ow];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = row[x..x + n].iter().zip(k).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (i, &kw) in k.iter().enumerate() {
            let src = &horiz[(y + i) * ow..(y + i + 1) * ow];
            for (d, s) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *d += kw * s;
            }
        }
    }
    out
}

fn frame_ssim(a: &Frame, b: &Frame, window: &[f64]) -> f64 {
    let (h, w) = (a.height(), a.width());
    let x = luma(a);
    let y = luma(b);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let mx = filter_valid(&x, h, w, window);
    let my = filter_valid(&y, h, w, window);
    let sxx = filter_valid(&xx, h, w, window);
    let syy = filter_valid(&yy, h, w, window);
    let sxy = filter_valid(&xy, h, w, window);
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cov = sxy[i] - ux * uy;
        total += ((2.0 * ux * uy + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2));
    }
    total / mx.len() as f64
}

/// Single-scale SSIM on Rec.601 luma with an 11x11 Gaussian window (sigma 1.5),
/// averaged over window positions that fit inside the frame.
pub fn ssim(reference: &Clip, test: &Clip) -> Result<MetricReport> {
    same_shape(reference, test)?;
    if reference.height() < SSIM_WINDOW || reference.width() < SSIM_WINDOW {
        return Err(Error::param(format!(
            "ssim needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            reference.height(),
            reference.width()
        )));
    }
    let window = gaussian_window();
    let per_frame = reference
        .frames()
        .par_iter()
        .zip(test.frames().par_iter())
        .map(|(a, b)| frame_ssim(a, b, &window))
        .collect();
    Ok(MetricReport::new("ssim", "unitless", per_frame))
}

/// `(1 / (T - 1)) * sum_t MSE(X_{t+1}, X_t)`.
pub fn flicker_energy(clip: &Clip) -> Result<f64> {
    if clip.len() < 2 {
        return Err(Error::param(format!("flicker energy needs T >= 2, got {}", clip.len())));
    }
    let steps: Vec<f64> = clip.frames().par_windows(2).map(|p| frame_mse(&p[1], &p[0])).collect();
    Ok(steps.iter().sum::<f64>() / steps.len() as f64)
}
