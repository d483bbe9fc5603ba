#![no_main]

use libfuzzer_sys::fuzz_target;
use stokes_poisson::io::parse_braid_word;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(w) = parse_braid_word(text) {
        let _ = w.check(5);
    }
});
