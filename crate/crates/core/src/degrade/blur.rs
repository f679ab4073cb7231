//! Oriented line-kernel motion blur.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::clip::{Clip, Frame, CHANNELS};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Sample coordinates this close to an integer are treated as exact lattice hits.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub dx: i32,
    pub dy: i32,
    pub weight: f64,
}

/// A normalized line kernel of orientation `theta_deg` and length `length` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct LineKernel {
    theta_deg: f64,
    length: f64,
    taps: Vec<Tap>,
}

impl LineKernel {
    pub fn theta_deg(&self) -> f64 {
        self.theta_deg
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Taps sorted by `(dy, dx)`.
    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn weight_sum(&self) -> f64 {
        self.taps.iter().map(|t| t.weight).sum()
    }

    /// True for the single-tap delta kernel.
    pub fn is_identity(&self) -> bool {
        matches!(self.taps[..], [Tap { dx: 0, dy: 0, .. }])
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Builds the kernel from `⌈len⌉` unit-spaced samples along `(cos θ, sin θ)`,
/// centered on the origin. Each sample spreads over its bilinear footprint.
pub fn make_line_kernel(theta_deg: f64, len: f64) -> Result<LineKernel> {
    if !len.is_finite() || len < 1.0 {
        return Err(Error::param(format!("kernel length must be >= 1, got {len}")));
    }
    if !theta_deg.is_finite() {
        return Err(Error::param(format!("kernel orientation {theta_deg} is not finite")));
    }
    let theta_deg = theta_deg.rem_euclid(360.0);
    let samples = len.ceil() as usize;
    let (sin, cos) = theta_deg.to_radians().sin_cos();
    let center = (samples - 1) as f64 / 2.0;
    let share = 1.0 / samples as f64;
    let mut acc: BTreeMap<(i32, i32), f64> = BTreeMap::new();
    for i in 0..samples {
        let offset = i as f64 - center;
        let x = snap(offset * cos);
        let y = snap(offset * sin);
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let corners = [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ];
        for (ox, oy, w) in corners {
            if w > 0.0 {
                let key = (y0 as i32 + oy, x0 as i32 + ox);
                *acc.entry(key).or_insert(0.0) += w * share;
            }
        }
    }
    let total: f64 = acc.values().sum();
    let taps = acc
        .into_iter()
        .map(|((dy, dx), w)| Tap {
            dx,
            dy,
            weight: w / total,
        })
        .collect();
    Ok(LineKernel {
        theta_deg,
        length: len,
        taps,
    })
}

/// Correlates one frame with `kernel`, clamping source coordinates to the frame.
///
/// The kernel is point-symmetric, so this equals convolution.
pub(crate) fn apply_kernel(frame: &Frame, kernel: &LineKernel) -> Frame {
    if kernel.is_identity() {
        return frame.clone();
    }
    let (h, w) = (frame.height(), frame.width());
    let stride = w * CHANNELS;
    let wi = w as isize;
    let mut out = vec![0.0f32; h * stride];
    for (y, dst) in out.chunks_exact_mut(stride).enumerate() {
        for tap in kernel.taps() {
            let sy = (y as isize + tap.dy as isize).clamp(0, h as isize - 1) as usize;
            let src = frame.row(sy);
            let weight = tap.weight as f32;
            let dx = tap.dx as isize;
            // Columns left of `left_end` read the first pixel, columns from
            // `right_start` on read the last one, the rest read `x + dx`.
            let left_end = (-dx).clamp(0, wi) as usize;
            let right_start = (wi - dx).clamp(0, wi) as usize;
            let first = &src[..CHANNELS];
            let last = &src[stride - CHANNELS..];
            for px in dst[..left_end * CHANNELS].chunks_exact_mut(CHANNELS) {
                for c in 0..CHANNELS {
                    px[c] += weight * first[c];
                }
            }
            if left_end < right_start {
                let from = (left_end as isize + dx) as usize * CHANNELS;
                let to = (right_start as isize + dx) as usize * CHANNELS;
                for (d, s) in dst[left_end * CHANNELS..right_start * CHANNELS]
                    .iter_mut()
                    .zip(&src[from..to])
                {
                    *d += weight * s;
                }
            }
            for px in dst[right_start.max(left_end) * CHANNELS..].chunks_exact_mut(CHANNELS) {
                for c in 0..CHANNELS {
                    px[c] += weight * last[c];
                }
            }
        }
    }
    out.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Frame::from_parts(h, w, out)
}

/// Blurs frame `t` with the line kernel `K(θ_t, ℓ_t)`.
pub fn motion_blur(clip: &Clip, theta: &Trajectory, len: &Trajectory) -> Result<Clip> {
    let n = clip.len();
    if theta.len() != n || len.len() != n {
        return Err(Error::param(format!(
            "blur trajectories have {} and {} values for {n} frames",
            theta.len(),
            len.len()
        )));
    }
    let kernels = theta
        .values()
        .iter()
        .zip(len.values())
        .map(|(&th, &l)| make_line_kernel(th, l))
        .collect::<Result<Vec<_>>>()?;
    let frames = clip
        .frames()
        .par_iter()
        .zip(kernels.par_iter())
        .map(|(frame, kernel)| apply_kernel(frame, kernel))
        .collect();
    Ok(Clip::from_frames(frames))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taps(k: &LineKernel) -> Vec<(i32, i32, f64)> {
        k.taps().iter().map(|t| (t.dx, t.dy, t.weight)).collect()
    }

    #[test]
    fn unit_length_is_delta() {
        for theta in [0.0, 33.0, 90.0, 271.5] {
            let k = make_line_kernel(theta, 1.0).unwrap();
            assert_eq!(taps(&k), vec![(0, 0, 1.0)]);
        }
    }

    #[test]
    fn horizontal_five() {
        let k = make_line_kernel(0.0, 5.0).unwrap();
        let got = taps(&k);
        assert_eq!(got.len(), 5);
        for (i, (dx, dy, w)) in got.into_iter().enumerate() {
            assert_eq!((dx, dy), (i as i32 - 2, 0));
            assert!((w - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_three() {
        let k = make_line_kernel(90.0, 3.0).unwrap();
        let got = taps(&k);
        assert_eq!(got.len(), 3);
        for (i, (dx, dy, w)) in got.into_iter().enumerate() {
            assert_eq!((dx, dy), (0, i as i32 - 1));
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_spreads_over_footprints() {
        let k = make_line_kernel(45.0, 3.0).unwrap();
        assert!(k.taps().len() > 3);
        assert!((k.weight_sum() - 1.0).abs() < 1e-12);
        // Point symmetry about the origin.
        for t in k.taps() {
            let mirror = k.taps().iter().find(|m| m.dx == -t.dx && m.dy == -t.dy);
            assert!(mirror.is_some_and(|m| (m.weight - t.weight).abs() < 1e-12));
        }
    }

    #[test]
    fn short_or_bad_lengths_are_rejected() {
        assert!(make_line_kernel(0.0, 0.5).is_err());
        assert!(make_line_kernel(0.0, f64::NAN).is_err());
        assert!(make_line_kernel(f64::INFINITY, 3.0).is_err());
    }

    #[test]
    fn step_edge_blur() {
        let row: Vec<f32> = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0].iter().flat_map(|&v| [v; 3]).collect();
        let frame = Frame::new(1, 6, row).unwrap();
        let out = apply_kernel(&frame, &make_line_kernel(0.0, 3.0).unwrap());
        let expected = [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0];
        for (x, e) in expected.iter().enumerate() {
            assert!((out.pixel(x, 0)[0] - e).abs() < 1e-6, "{:?}", out.data());
        }
    }

    #[test]
    fn taps_wider_than_the_frame_clamp() {
        let frame = Frame::from_fn(3, 2, |x, y| [x as f32 * 0.5, y as f32 * 0.25, 0.5]);
        let k = make_line_kernel(0.0, 9.0).unwrap();
        let out = apply_kernel(&frame, &k);
        // Row has values [0, 0.5]; taps -4..=4 clamp to 5 hits of 0 and 4 of 0.5 at x=0.
        assert!((out.pixel(0, 0)[0] - 4.0 * 0.5 / 9.0).abs() < 1e-6);
        assert!((out.pixel(1, 0)[0] - 5.0 * 0.5 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn constant_frames_are_fixed() {
        let clip = Clip::new(vec![Frame::filled(9, 11, [0.3, 0.6, 0.9]); 3]).unwrap();
        let theta = Trajectory::from_values(vec![17.0, 123.0, 301.0]);
        let len = Trajectory::from_values(vec![4.5, 20.0, 7.2]);
        let out = motion_blur(&clip, &theta, &len).unwrap();
        for (a, b) in out.frames().iter().zip(clip.frames()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn unit_length_trajectory_is_identity() {
        let clip = Clip::new(vec![Frame::from_fn(4, 5, |x, y| [x as f32 / 5.0, y as f32 / 4.0, 0.1]); 2]).unwrap();
        let out = motion_blur(&clip, &Trajectory::constant(42.0, 2), &Trajectory::constant(1.0, 2)).unwrap();
        assert_eq!(out, clip);
    }

    #[test]
    fn trajectory_length_mismatch() {
        let clip = Clip::new(vec![Frame::filled(2, 2, [0.0; 3]); 2]).unwrap();
        assert!(motion_blur(&clip, &Trajectory::constant(0.0, 3), &Trajectory::constant(3.0, 2)).is_err());
    }
}
