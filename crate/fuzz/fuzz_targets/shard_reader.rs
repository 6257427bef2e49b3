#![no_main]

use corpuskit::analytics::VocabIndex;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut index = VocabIndex::new();
    if index.add_shard_reader(data).is_ok() {
        index.check_invariants().unwrap();
    }
});
