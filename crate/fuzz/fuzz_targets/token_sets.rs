#![no_main]

use corpuskit::analytics::read_token_sets;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sets) = read_token_sets(data) {
        for (cat, tokens) in sets {
            assert!(!cat.is_empty());
            assert!(!tokens.is_empty());
        }
    }
});
