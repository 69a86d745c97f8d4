#![no_main]

use libfuzzer_sys::fuzz_target;
use pingpong_core::contraction::FreenessCertificate;

// Stored certificates are untrusted input to `revalidate`.
fuzz_target!(|data: &[u8]| {
    if let Ok(cert) = serde_json::from_slice::<FreenessCertificate>(data) {
        let _ = cert.revalidate();
    }
});
