#![no_main]

use libfuzzer_sys::fuzz_target;
use std::collections::BTreeMap;
use tcbforge::drc::MaterialProfile;
use tcbforge::fabricate::{parse_gcode_bytes, patch_gcode, PatchOptions, ToolProfile};

fuzz_target!(|data: &[u8]| {
    let Ok(program) = parse_gcode_bytes(data) else {
        return;
    };
    let tools = BTreeMap::from([
        (0, ToolProfile::insulator()),
        (1, ToolProfile::conductive(&MaterialProfile::default())),
    ]);
    let opts = PatchOptions::default();
    if let Ok((once, _)) = patch_gcode(&program, &tools, &opts) {
        let (twice, summary) =
            patch_gcode(&once, &tools, &opts).expect("patched output re-patches");
        assert!(!summary.changed());
        assert_eq!(twice.lines, once.lines);
    }
});
