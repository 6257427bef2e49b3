#![no_main]

use corpuskit_harvest::{parse_absolute, AllowPattern};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(url) = parse_absolute(text) {
        assert!(matches!(url.scheme(), "http" | "https"));
        assert!(url.fragment().is_none());
        // canonical form is a fixed point
        assert_eq!(parse_absolute(url.as_str()).unwrap(), url);
        if let Ok(p) = AllowPattern::parse(text) {
            let _ = p.matches(&url);
        }
    }
});
