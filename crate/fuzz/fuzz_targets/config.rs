#![no_main]

use libfuzzer_sys::fuzz_target;
use qfp_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::parse(text) {
        if let Ok(grid) = config.phase_grid() {
            assert!(grid.dx > 0.0 && grid.dv > 0.0);
        }
        let _ = config.describe();
    }
});
