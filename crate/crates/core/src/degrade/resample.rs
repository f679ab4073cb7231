//! Joint spatial and temporal down/up sampling.

use rayon::prelude::*;

use super::fill_gaps;
use crate::clip::{Clip, Frame, CHANNELS};
use crate::error::{Error, Result};

/// Contiguous source taps for one output position along an axis.
#[derive(Debug, Clone)]
struct AxisTaps {
    start: usize,
    weights: Vec<f32>,
}

/// Box-filter (area) weights from `n_in` samples to `n_out <= n_in` samples.
fn area_taps(n_in: usize, n_out: usize) -> Vec<AxisTaps> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|i| {
            let lo = i as f64 * ratio;
            let hi = ((i + 1) as f64 * ratio).min(n_in as f64);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(n_in);
            let weights: Vec<f64> = (first..last)
                .map(|j| {
                    let overlap = (hi.min((j + 1) as f64) - lo.max(j as f64)).max(0.0);
                    overlap / (hi - lo)
                })
                .collect();
            trim(first, weights)
        })
        .collect()
}

/// Bilinear weights with half-pixel centers from `n_in` samples up to `n_out`, clamped at the edges.
fn bilinear_taps(n_in: usize, n_out: usize) -> Vec<AxisTaps> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|p| {
            let src = ((p as f64 + 0.5) * ratio - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = src.floor() as usize;
            let f = src - i0 as f64;
            if i0 + 1 >= n_in {
                trim(i0, vec![1.0])
            } else {
                trim(i0, vec![1.0 - f, f])
            }
        })
        .collect()
}

/// Drops zero weights at either end so exact lattice hits touch a single sample.
fn trim(mut start: usize, mut weights: Vec<f64>) -> AxisTaps {
    while weights.len() > 1 && weights[0] == 0.0 {
        weights.remove(0);
        start += 1;
    }
    while weights.len() > 1 && *weights.last().unwrap() == 0.0 {
        weights.pop();
    }
    AxisTaps {
        start,
        weights: weights.into_iter().map(|w| w as f32).collect(),
    }
}

/// Resamples each row of an interleaved `height x w_in` plane to `w_out` columns.
fn resample_rows(data: &[f32], height: usize, w_in: usize, taps: &[AxisTaps]) -> Vec<f32> {
    let w_out = taps.len();
    let mut out = vec![0.0f32; height * w_out * CHANNELS];
    for (src, dst) in data
        .chunks_exact(w_in * CHANNELS)
        .zip(out.chunks_exact_mut(w_out * CHANNELS))
    {
        for (px, tap) in dst.chunks_exact_mut(CHANNELS).zip(taps) {
            for (k, &w) in tap.weights.iter().enumerate() {
                let s = (tap.start + k) * CHANNELS;
                for c in 0..CHANNELS {
                    px[c] += w * src[s + c];
                }
            }
        }
    }
    out
}

/// Resamples the rows of an interleaved plane of width `width` to `taps.len()` rows.
fn resample_cols(data: &[f32], width: usize, taps: &[AxisTaps]) -> Vec<f32> {
    let stride = width * CHANNELS;
    let mut out = vec![0.0f32; taps.len() * stride];
    for (dst, tap) in out.chunks_exact_mut(stride).zip(taps) {
        for (k, &w) in tap.weights.iter().enumerate() {
            let src = &data[(tap.start + k) * stride..(tap.start + k + 1) * stride];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

fn check_factor(name: &str, factor: f64) -> Result<()> {
    if !factor.is_finite() || factor < 1.0 {
        return Err(Error::param(format!("{name} factor must be >= 1, got {factor}")));
    }
    Ok(())
}

/// Area-downsamples every frame to `(⌈H/s⌉, ⌈W/s⌉)` and bilinearly upsamples it back to `(H, W)`.
pub fn spatial_resample(clip: &Clip, s_spat: f64) -> Result<Clip> {
    check_factor("spatial", s_spat)?;
    if s_spat == 1.0 {
        return Ok(clip.clone());
    }
    let (h, w) = (clip.height(), clip.width());
    let h_small = ((h as f64 / s_spat).ceil() as usize).clamp(1, h);
    let w_small = ((w as f64 / s_spat).ceil() as usize).clamp(1, w);
    let down_x = area_taps(w, w_small);
    let down_y = area_taps(h, h_small);
    let up_x = bilinear_taps(w_small, w);
    let up_y = bilinear_taps(h_small, h);
    let frames = clip
        .frames()
        .par_iter()
        .map(|frame| {
            let small = resample_cols(&resample_rows(frame.data(), h, w, &down_x), w_small, &down_y);
            let mut full = resample_cols(&resample_rows(&small, h_small, w_small, &up_x), w, &up_y);
            full.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            Frame::from_parts(h, w, full)
        })
        .collect();
    Ok(Clip::from_frames(frames))
}

/// Frames kept by temporal subsampling: indices `round(k * s_temp)` below `frames`.
pub fn temporal_keep_mask(frames: usize, s_temp: f64) -> Result<Vec<bool>> {
    check_factor("temporal", s_temp)?;
    let mut keep = vec![false; frames];
    for k in 0.. {
        let t = (k as f64 * s_temp).round();
        if t >= frames as f64 {
            break;
        }
        keep[t as usize] = true;
    }
    Ok(keep)
}

/// Keeps frames `round(k * s_temp)` and re-times back to `T` frames by linear
/// blending of the nearest kept neighbors; trailing frames repeat the last kept one.
pub fn temporal_resample(clip: &Clip, s_temp: f64) -> Result<Clip> {
    let keep = temporal_keep_mask(clip.len(), s_temp)?;
    if keep.iter().all(|&k| k) {
        return Ok(clip.clone());
    }
    Ok(fill_gaps(clip, &keep))
}

/// Spatiotemporal downsampling with reconstruction to the original resolution and frame count.
pub fn st_downsample(clip: &Clip, s_spat: f64, s_temp: f64) -> Result<Clip> {
    check_factor("spatial", s_spat)?;
    check_factor("temporal", s_temp)?;
    let spatial = spatial_resample(clip, s_spat)?;
    temporal_resample(&spatial, s_temp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants(values: &[f32], h: usize, w: usize) -> Clip {
        Clip::new(values.iter().map(|&v| Frame::filled(h, w, [v; 3])).collect()).unwrap()
    }

    fn textured(t: usize, h: usize, w: usize) -> Clip {
        Clip::new(
            (0..t)
                .map(|k| {
                    Frame::from_fn(h, w, |x, y| {
                        let v = ((x * 7 + y * 13 + k * 5) % 17) as f32 / 16.0;
                        [v, 1.0 - v, (v * 0.5 + 0.25)]
                    })
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unit_factors_are_identity() {
        let clip = textured(5, 7, 9);
        assert_eq!(st_downsample(&clip, 1.0, 1.0).unwrap(), clip);
    }

    #[test]
    fn factors_below_one_are_rejected() {
        let clip = textured(2, 4, 4);
        assert!(st_downsample(&clip, 0.5, 1.0).is_err());
        assert!(st_downsample(&clip, 1.0, 0.99).is_err());
        assert!(st_downsample(&clip, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn temporal_retiming_interpolates_and_clamps() {
        let clip = constants(&[0.0, 0.3, 0.6, 0.9], 2, 3);
        let out = temporal_resample(&clip, 2.0).unwrap();
        let got: Vec<f32> = out.frames().iter().map(|f| f.data()[0]).collect();
        for (a, b) in got.iter().zip([0.0, 0.3, 0.6, 0.6]) {
            assert!((a - b).abs() < 1e-6, "{got:?}");
        }
        assert!(out.frames().iter().all(|f| f.data().iter().all(|&v| v == f.data()[0])));
    }

    #[test]
    fn keep_mask_uses_rounded_multiples() {
        let keep = temporal_keep_mask(10, 2.5).unwrap();
        let kept: Vec<usize> = (0..10).filter(|&t| keep[t]).collect();
        // 0, 2.5 -> 3, 5, 7.5 -> 8
        assert_eq!(kept, vec![0, 3, 5, 8]);
    }

    #[test]
    fn constants_survive_any_factors() {
        let clip = constants(&[0.37, 0.37, 0.37, 0.37, 0.37], 13, 21);
        for (s, t) in [(1.3, 1.5), (2.0, 2.0), (2.5, 3.5), (7.0, 1.0), (40.0, 9.0)] {
            let out = st_downsample(&clip, s, t).unwrap();
            assert_eq!(out.shape(), clip.shape());
            for f in out.frames() {
                assert!(f.data().iter().all(|v| (v - 0.37).abs() < 1e-6));
            }
        }
    }

    #[test]
    fn area_weights_partition_unity() {
        for (n_in, n_out) in [(10, 4), (480, 192), (7, 7), (5, 1), (832, 555)] {
            for tap in area_taps(n_in, n_out) {
                let sum: f32 = tap.weights.iter().sum();
                assert!((sum - 1.0).abs() < 1e-6);
                assert!(tap.start + tap.weights.len() <= n_in);
            }
        }
    }

    #[test]
    fn exact_halving_averages_pairs() {
        let frame = Frame::new(1, 4, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.2, 0.2, 0.2, 0.4, 0.4, 0.4]).unwrap();
        let half = resample_rows(frame.data(), 1, 4, &area_taps(4, 2));
        for (a, b) in half.iter().zip([0.5, 0.5, 0.5, 0.3, 0.3, 0.3]) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn spatial_stage_smooths_detail() {
        let clip = textured(1, 32, 32);
        let out = spatial_resample(&clip, 2.0).unwrap();
        let energy = |c: &Clip| {
            c.frame(0)
                .data()
                .windows(4)
                .map(|w| (w[3] - w[0]).abs())
                .sum::<f32>()
        };
        assert!(energy(&out) < energy(&clip));
        assert!(out.frame(0).data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
