#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::vio::{read_y4m, write_y4m, FrameRate};

fuzz_target!(|data: &[u8]| {
    if let Ok(clip) = read_y4m(data) {
        let bytes = write_y4m(&clip, FrameRate::default(), Vec::new()).expect("decoded clips re-encode");
        let again = read_y4m(&bytes[..]).expect("re-encoded stream decodes");
        assert_eq!(again.shape(), clip.shape());
    }
});
