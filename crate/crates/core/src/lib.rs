//! Temporally coherent video degradation and full-reference evaluation.
//!
//! A clean clip goes through a [`curriculum::RecipeRecord`] (one spatial stage
//! followed by a few temporal operators whose parameters drift smoothly over
//! time) to produce a degraded clip. Every recipe is fully resolved and
//! serializable, so a degradation can be replayed bit-exactly. The
//! [`metrics`] module measures the result against the clean reference.

pub mod clip;
pub mod curriculum;
pub mod degrade;
pub mod error;
pub mod metrics;
pub mod synth;
pub mod trajectory;
pub mod vio;

pub use clip::{Clip, ClipShape, Frame};
pub use error::{Error, Result};
