#![no_main]

use libfuzzer_sys::fuzz_target;
use rsqueue::harness::{parse_records_csv, records_to_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(recs) = parse_records_csv(text) {
            let back = parse_records_csv(&records_to_csv(&recs)).expect("re-parse");
            assert_eq!(back.len(), recs.len());
        }
    }
});
