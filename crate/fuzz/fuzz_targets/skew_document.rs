#![no_main]

use libfuzzer_sys::fuzz_target;
use stokes_poisson::io::parse_skew_document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_skew_document(text) {
        let _ = doc.v.eigenvalues();
        let _ = doc.u.check_admissible();
    }
});
