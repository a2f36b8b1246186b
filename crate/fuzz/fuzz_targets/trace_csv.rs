#![no_main]

use libfuzzer_sys::fuzz_target;
use modsel::harness::{read_trace_csv, trace_to_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(trace) = read_trace_csv(data) else { return };
    let text = trace_to_csv_string(&trace).expect("parsed trace serializes");
    let back = read_trace_csv(text.as_bytes()).expect("serialized trace parses");
    // NaN cells compare unequal, so compare the canonical text instead.
    assert_eq!(trace_to_csv_string(&back).unwrap(), text);
});
