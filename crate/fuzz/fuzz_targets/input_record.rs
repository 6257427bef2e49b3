#![no_main]

use corpuskit::pipeline::{parse_input_line, parse_text_record, to_input_line};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_text_record(data);
    if let Ok(doc) = parse_input_line(data, Some("fuzz")) {
        assert!(!doc.id.is_empty());
        // a parsed record survives a write/read round trip unchanged
        let line = to_input_line(&doc);
        let again = parse_input_line(line.as_bytes(), None).expect("round trip");
        assert_eq!(doc, again);
    }
});
