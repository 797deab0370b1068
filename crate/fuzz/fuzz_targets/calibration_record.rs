#![no_main]

use atomchip::noise::CalibrationRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = CalibrationRecord::from_toml(s);
    }
});
