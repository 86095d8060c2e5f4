#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbforge::drc::DrcConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let mut cfg = DrcConfig::default();
    for line in s.lines() {
        let _ = cfg.apply_assignment(line);
    }
});
