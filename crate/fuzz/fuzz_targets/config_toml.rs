#![no_main]

use std::path::Path;

use corpuskit::PipelineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = PipelineConfig::parse(text, Path::new("/fuzz")) {
        assert_eq!(cfg.digest().len(), 64);
        assert!(cfg.jobs >= 1);
    }
});
