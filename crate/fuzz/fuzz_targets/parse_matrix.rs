#![no_main]

use libfuzzer_sys::fuzz_target;
use pingpong_core::io::parse_matrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_matrix(text) {
        // Accepted matrices are invertible with an inverse of matching size.
        assert_eq!(g.inverse_matrix().nrows(), g.dim());
    }
});
