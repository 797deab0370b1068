#![no_main]

use atomchip::scenario::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(config) = ScenarioConfig::from_toml(s) {
            let _ = config.chip_layout();
            if let Some(ramp) = &config.ramp {
                let _ = config.ramp_end_layout(&ramp.end);
            }
        }
    }
});
