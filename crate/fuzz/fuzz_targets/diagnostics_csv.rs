#![no_main]

use libfuzzer_sys::fuzz_target;
use qfp_core::csvio::{parse_diagnostics, write_diagnostics};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_diagnostics(data) {
        let mut out = Vec::new();
        write_diagnostics(&mut out, &[], &rows).expect("writing to memory");
        let again = parse_diagnostics(out.as_slice()).expect("own output parses");
        assert_eq!(again.len(), rows.len());
    }
});
