#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_cli::config::{ConfigLayer, RunConfig};

fuzz_target!(|text: &str| {
    let Ok(layer) = ConfigLayer::from_json(text) else { return };
    for command in ["degrade", "replay", "eval", "bench", "preview"] {
        let _ = RunConfig::resolve(command, ConfigLayer::default(), layer.clone());
    }
});
