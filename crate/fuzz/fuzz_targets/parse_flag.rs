#![no_main]

use libfuzzer_sys::fuzz_target;
use pingpong_core::io::{parse_flag, parse_opposite_flag};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_flag(text);
    let _ = parse_opposite_flag(text);
});
