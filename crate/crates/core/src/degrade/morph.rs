use rayon::prelude::*;

use super::blend;
use crate::clip::Clip;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Blends each frame toward its successor: `Y_t = α_t·X_t + (1 − α_t)·X_{t+1}`.
///
/// The successor index is clamped, so the last frame passes through unchanged.
pub fn temporal_morph(clip: &Clip, alpha: &Trajectory) -> Result<Clip> {
    let n = clip.len();
    if alpha.len() != n {
        return Err(Error::param(format!(
            "morph trajectory has {} values for {n} frames",
            alpha.len()
        )));
    }
    if let Some(a) = alpha.values().iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::param(format!("morph weight {a} outside [0, 1]")));
    }
    let frames = (0..n)
        .into_par_iter()
        .map(|t| {
            let a = alpha.values()[t] as f32;
            if t + 1 == n || a == 1.0 {
                clip.frame(t).clone()
            } else {
                blend(clip.frame(t), a, clip.frame(t + 1), 1.0 - a)
            }
        })
        .collect();
    Ok(Clip::from_frames(frames))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::Frame;

    fn constants(values: &[f32]) -> Clip {
        Clip::new(values.iter().map(|&v| Frame::filled(3, 2, [v; 3])).collect()).unwrap()
    }

    #[test]
    fn unit_alpha_is_identity() {
        let clip = constants(&[0.1, 0.7, 0.4]);
        assert_eq!(temporal_morph(&clip, &Trajectory::constant(1.0, 3)).unwrap(), clip);
    }

    #[test]
    fn quarter_alpha_blend() {
        let clip = constants(&[0.0, 1.0]);
        let out = temporal_morph(&clip, &Trajectory::from_values(vec![0.25, 0.9])).unwrap();
        assert!(out.frame(0).data().iter().all(|v| (v - 0.75).abs() < 1e-6));
        assert_eq!(out.frame(1), clip.frame(1));
    }

    #[test]
    fn zero_alpha_shifts_forward() {
        let clip = constants(&[0.1, 0.2, 0.3, 0.4]);
        let out = temporal_morph(&clip, &Trajectory::constant(0.0, 4)).unwrap();
        for t in 0..3 {
            assert_eq!(out.frame(t), clip.frame(t + 1));
        }
        assert_eq!(out.frame(3), clip.frame(3));
    }

    #[test]
    fn bad_trajectories_are_rejected() {
        let clip = constants(&[0.1, 0.2]);
        assert!(temporal_morph(&clip, &Trajectory::constant(1.0, 3)).is_err());
        assert!(temporal_morph(&clip, &Trajectory::constant(1.5, 2)).is_err());
    }
}
