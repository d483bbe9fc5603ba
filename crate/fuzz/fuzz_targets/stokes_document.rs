#![no_main]

use libfuzzer_sys::fuzz_target;
use stokes_poisson::io::parse_stokes_document;
use stokes_poisson::stokes_bracket::{bracket_table, casimirs, KAPPA};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_stokes_document(text) {
        if s.n() <= 8 {
            let _ = bracket_table(&s, KAPPA);
            let _ = casimirs(&s);
        }
    }
});
