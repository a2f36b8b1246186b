#![no_main]

use libfuzzer_sys::fuzz_target;
use modsel::environment::Instance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = Instance::from_json(text) else { return };
    let json = inst.to_json().expect("valid instance serializes");
    let back = Instance::from_json(&json).expect("serialized instance parses");
    assert_eq!(back.biases(), inst.biases());
    assert_eq!(back.theta(), inst.theta());
    assert_eq!(back.covariances(), inst.covariances());
});
