#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::clip::{clip_from_bytes, clip_to_bytes};

// The first three bytes pick T, H and W; the rest is the sample payload.
fuzz_target!(|data: &[u8]| {
    let [t, h, w, raw @ ..] = data else { return };
    if let Ok(clip) = clip_from_bytes(raw, *t as usize, *h as usize, *w as usize) {
        assert_eq!(clip_to_bytes(&clip), raw);
    }
});
