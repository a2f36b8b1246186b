#![no_main]

use libfuzzer_sys::fuzz_target;
use modsel::harness::SweepGrid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = SweepGrid::from_toml_str(text) {
        let _ = grid.cells();
    }
});
