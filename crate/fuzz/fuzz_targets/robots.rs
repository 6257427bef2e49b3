#![no_main]

use corpuskit_harvest::RobotsRules;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let body = String::from_utf8_lossy(data);
    let rules = RobotsRules::parse(&body, "corpuskit");
    for path in ["/", "/pa/archive/1", "/private?x=1", ""] {
        let _ = rules.is_allowed(path);
    }
});
