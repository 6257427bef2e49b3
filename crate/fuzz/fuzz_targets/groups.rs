#![no_main]

use corpuskit::analytics::read_groups;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(groups) = read_groups(data) {
        let mut labels: Vec<_> = groups.iter().map(|(g, _)| g.as_str()).collect();
        let n = labels.len();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), n);
    }
});
