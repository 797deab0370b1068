#![no_main]

use atomchip::kinetics::{fit_exponential, DecayDataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(d) = DecayDataset::from_csv(s) {
            let _ = fit_exponential(&d);
        }
    }
});
