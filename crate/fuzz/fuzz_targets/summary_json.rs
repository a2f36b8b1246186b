#![no_main]

use libfuzzer_sys::fuzz_target;
use modsel::harness::SweepSummary;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(summary) = SweepSummary::from_json(text) else { return };
    let json = summary.to_json().expect("parsed summary serializes");
    let back = SweepSummary::from_json(&json).expect("serialized summary parses");
    assert_eq!(back.to_json().unwrap(), json);
});
