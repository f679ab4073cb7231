#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::curriculum::{apply_recipe, RecipeRecord};
use tempdeg_core::synth::synthetic_clip;

fuzz_target!(|text: &str| {
    let Ok(recipe) = RecipeRecord::from_json(text) else { return };
    let canonical = recipe.to_canonical_json();
    assert_eq!(RecipeRecord::from_json(&canonical).expect("canonical form parses"), recipe);
    let shape = recipe.shape;
    let small = shape.frames <= 8 && shape.height <= 16 && shape.width <= 16;
    if small {
        if let Ok(clip) = synthetic_clip(0, shape) {
            let _ = apply_recipe(&clip, &recipe);
        }
    }
});
