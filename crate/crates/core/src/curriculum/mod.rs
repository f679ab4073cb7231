//! Preset tables, recipe sampling and replay.

mod preset;
mod recipe;

pub use preset::{bounds, preset_spec, Preset, PresetSpec, Range};
pub use recipe::{
    apply_recipe, apply_recipe_timed, degrade, quantize, resolve_op, sample_recipe, OperatorKind, RecipeRecord,
    SpatialMethod, SpatialStage, StageTiming, TemporalOp, RECIPE_VERSION,
};
