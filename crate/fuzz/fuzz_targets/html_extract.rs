#![no_main]

use corpuskit_harvest::{discover_links, extract_content, url_filter, AllowPattern, ContentSelector, SpiderConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let html = String::from_utf8_lossy(data);
    let sel = ContentSelector::parse("article p::text").unwrap();
    let _ = extract_content(&html, &sel);

    let mut cfg = SpiderConfig::new("fuzz", &["https://example.org/pa/"], "p").unwrap();
    cfg.allow_patterns = vec![AllowPattern::parse("/").unwrap()];
    cfg.url_must_contain = Some("/pa/".into());
    let base = cfg.start_urls[0].clone();
    for link in discover_links(&html, &base, &cfg) {
        assert!(url_filter(&link, &cfg));
        assert!(link.fragment().is_none());
    }
});
