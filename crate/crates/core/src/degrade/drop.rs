use super::fill_gaps;
use crate::clip::Clip;
use crate::error::{Error, Result};
use crate::trajectory::Stream;

/// Which frames survive a drop event. Both endpoints are always kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DropMask {
    keep: Vec<bool>,
}

impl DropMask {
    pub fn new(keep: Vec<bool>) -> Result<Self> {
        if keep.len() < 2 {
            return Err(Error::param(format!(
                "drop mask needs at least 2 frames, got {}",
                keep.len()
            )));
        }
        if !keep[0] || !keep[keep.len() - 1] {
            return Err(Error::param("drop mask must keep the first and last frame"));
        }
        Ok(Self { keep })
    }

    pub fn all_kept(frames: usize) -> Result<Self> {
        Self::new(vec![true; frames])
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    /// Longest run of consecutive dropped frames.
    pub fn longest_drop_run(&self) -> usize {
        self.keep
            .split(|&k| k)
            .map(<[bool]>::len)
            .max()
            .unwrap_or(0)
    }

    pub fn dropped(&self) -> usize {
        self.keep.iter().filter(|&&k| !k).count()
    }
}

/// Drops each interior frame with probability `p_drop`, never letting a run of
/// drops exceed `max_run`. One draw is consumed per interior frame.
pub fn sample_drop_mask(stream: &mut Stream, frames: usize, p_drop: f64, max_run: usize) -> Result<DropMask> {
    if frames < 2 {
        return Err(Error::param(format!("frame dropping needs T >= 2, got {frames}")));
    }
    if !(0.0..1.0).contains(&p_drop) {
        return Err(Error::param(format!("drop probability {p_drop} outside [0, 1)")));
    }
    if max_run < 1 {
        return Err(Error::param("max_run must be at least 1"));
    }
    let mut keep = vec![true; frames];
    let mut run = 0;
    for slot in keep.iter_mut().take(frames - 1).skip(1) {
        let drop = stream.next_unit() < p_drop;
        if drop && run < max_run {
            *slot = false;
            run += 1;
        } else {
            run = 0;
        }
    }
    DropMask::new(keep)
}

/// Replaces every dropped frame `t` between kept neighbors `a < t < b` with
/// `((b − t)·X_a + (t − a)·X_b) / (b − a)`.
pub fn apply_drop(clip: &Clip, mask: &DropMask) -> Result<Clip> {
    if mask.len() != clip.len() {
        return Err(Error::param(format!(
            "drop mask covers {} frames, clip has {}",
            mask.len(),
            clip.len()
        )));
    }
    if mask.dropped() == 0 {
        return Ok(clip.clone());
    }
    Ok(fill_gaps(clip, mask.keep()))
}
