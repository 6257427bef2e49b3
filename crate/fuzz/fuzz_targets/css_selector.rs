#![no_main]

use corpuskit_harvest::{extract_content, ContentSelector};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sel) = ContentSelector::parse(text) {
        let reparsed = ContentSelector::parse(&sel.to_string()).expect("display reparses");
        assert_eq!(sel.to_string(), reparsed.to_string());
        let _ = extract_content("<article><p class=a id=b>x <b>y</b></p></article>", &sel);
    }
});
