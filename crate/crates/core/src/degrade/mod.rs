//! The degradation operators. Each is a pure `Clip -> Clip` map that keeps
//! `(T, H, W)` and produces convex combinations of input samples, so outputs
//! stay in `[0, 1]`.
//!
//! Per-frame work runs on the current rayon pool. All randomness is resolved
//! into trajectories, masks and fields before an operator runs, so the thread
//! count never changes an output sample.

mod blur;
mod drop;
mod morph;
mod resample;
mod warp;

pub use blur::{make_line_kernel, motion_blur, LineKernel, Tap};
pub use drop::{apply_drop, sample_drop_mask, DropMask};
pub use morph::temporal_morph;
pub use resample::{spatial_resample, st_downsample, temporal_keep_mask, temporal_resample};
pub use warp::{bilinear_sample, grid_warp};

use rayon::prelude::*;

use crate::clip::{Clip, Frame};

/// `wa * a + wb * b`, clamped to `[0, 1]`.
pub(crate) fn blend(a: &Frame, wa: f32, b: &Frame, wb: f32) -> Frame {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (wa * x + wb * y).clamp(0.0, 1.0))
        .collect();
    Frame::from_parts(a.height(), a.width(), data)
}

/// Rebuilds frames whose `keep` flag is false by linear blending of the nearest
/// kept neighbors. Frames after the last kept one repeat it.
///
/// `keep[0]` must be true.
pub(crate) fn fill_gaps(clip: &Clip, keep: &[bool]) -> Clip {
    debug_assert_eq!(keep.len(), clip.len());
    debug_assert!(keep[0]);
    let n = keep.len();
    let mut prev = vec![0usize; n];
    let mut next = vec![None; n];
    let mut last = 0;
    for t in 0..n {
        if keep[t] {
            last = t;
        }
        prev[t] = last;
    }
    let mut upcoming = None;
    for t in (0..n).rev() {
        if keep[t] {
            upcoming = Some(t);
        }
        next[t] = upcoming;
    }
    let frames = (0..n)
        .into_par_iter()
        .map(|t| {
            if keep[t] {
                return clip.frame(t).clone();
            }
            let a = prev[t];
            match next[t] {
                Some(b) => {
                    let span = (b - a) as f32;
                    let wa = (b - t) as f32 / span;
                    let wb = (t - a) as f32 / span;
                    blend(clip.frame(a), wa, clip.frame(b), wb)
                }
                None => clip.frame(a).clone(),
            }
        })
        .collect();
    Clip::from_frames(frames)
}
