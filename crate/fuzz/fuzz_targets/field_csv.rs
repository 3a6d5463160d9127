#![no_main]

use libfuzzer_sys::fuzz_target;
use qfp_core::csvio::parse_field;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_field(data) {
        if let Some(first) = rows.first() {
            assert!(rows.iter().all(|r| r.len() == first.len()));
        }
    }
});
