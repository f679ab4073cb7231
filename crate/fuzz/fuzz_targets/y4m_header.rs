#![no_main]

use libfuzzer_sys::fuzz_target;
use tempdeg_core::vio::parse_header;

fuzz_target!(|line: &str| {
    if let Ok(header) = parse_header(line) {
        let text = header.to_line();
        let again = parse_header(text.trim_end()).expect("canonical header parses");
        assert_eq!(again, header);
    }
});
