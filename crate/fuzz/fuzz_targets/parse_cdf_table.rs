#![no_main]

use libfuzzer_sys::fuzz_target;
use rsqueue::dist::CdfTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(t) = CdfTable::from_csv_str(text) {
            for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let q = t.quantile(u);
                assert!(q.is_finite());
                assert!(t.cdf(q) >= u - 1e-9);
            }
        }
    }
});
