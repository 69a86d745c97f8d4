#![no_main]

use libfuzzer_sys::fuzz_target;
use pingpong_core::io::{generators_to_json, parse_generators};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 20_000 {
        return;
    }
    if let Ok(gens) = parse_generators(text) {
        let again = parse_generators(&generators_to_json(&gens)).expect("serialized generators re-parse");
        assert_eq!(again.len(), gens.len());
    }
});
