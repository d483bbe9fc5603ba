#![no_main]

use libfuzzer_sys::fuzz_target;
use stokes_poisson::io::parse_flow_document;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse_flow_document(text) {
        let _ = doc.path.length();
    }
});
