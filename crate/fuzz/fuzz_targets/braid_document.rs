#![no_main]

use libfuzzer_sys::fuzz_target;
use stokes_poisson::io::parse_braid_document;
use stokes_poisson::stokes_bracket::braid_apply;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((s, w)) = parse_braid_document(text) {
        if w.len() <= 64 {
            let _ = braid_apply(&s, &w);
        }
    }
});
