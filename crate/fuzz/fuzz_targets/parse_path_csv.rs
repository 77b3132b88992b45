#![no_main]

use libfuzzer_sys::fuzz_target;
use rsqueue::paths::{reflect, GridPath};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = GridPath::from_csv_str(text) {
            let back = GridPath::from_csv_str(&p.to_csv()).expect("re-parse");
            assert_eq!(back.knots(), p.knots());
            let r = reflect(&p);
            assert!(r.values().iter().all(|v| *v >= 0.0 || v.is_nan()));
        }
    }
});
