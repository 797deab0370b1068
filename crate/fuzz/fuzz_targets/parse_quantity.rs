#![no_main]

use atomchip::units::{parse_quantity, parse_si, Dimension};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = parse_quantity(s) {
            // a value that parsed must survive its own display form
            let _ = parse_quantity(&v.to_string());
        }
        let _ = parse_si(s, Dimension::Length);
    }
});
