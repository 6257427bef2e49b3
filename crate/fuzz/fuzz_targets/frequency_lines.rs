#![no_main]

use corpuskit::analytics::parse_frequency_lines;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_frequency_lines(data) {
        for (t, f) in rows {
            assert!(!t.is_empty());
            assert!(f > 0);
        }
    }
});
