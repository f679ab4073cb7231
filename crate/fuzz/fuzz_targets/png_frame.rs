#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::vio::{decode_png_frame, encode_png_frame};

fuzz_target!(|data: &[u8]| {
    if let Ok(frame) = decode_png_frame(data) {
        let mut png = Vec::new();
        encode_png_frame(&frame, &mut png).expect("decoded frames re-encode");
        assert_eq!(decode_png_frame(&png).expect("own output decodes"), frame);
    }
});
