#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::metrics::{metric_gains, pair_sidecars, parse_sidecar};

fuzz_target!(|text: &str| {
    let Ok(entries) = parse_sidecar(text) else { return };
    let pairs = pair_sidecars(&entries, &entries).expect("a sidecar pairs with itself");
    let frames: Vec<usize> = pairs.iter().map(|p| p.frame_index).collect();
    if let Ok(gains) = metric_gains(&pairs, &frames) {
        for gain in gains.values() {
            assert!(gain.percent == 0.0 || gain.used == 0);
        }
    }
});
