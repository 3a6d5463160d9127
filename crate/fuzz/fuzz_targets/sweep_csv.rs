#![no_main]

use libfuzzer_sys::fuzz_target;
use qfp_core::csvio::{parse_sweep, write_sweep};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_sweep(data) {
        let mut out = Vec::new();
        write_sweep(&mut out, &[], &rows).expect("writing to memory");
        let again = parse_sweep(out.as_slice()).expect("own output parses");
        assert_eq!(again.len(), rows.len());
    }
});
