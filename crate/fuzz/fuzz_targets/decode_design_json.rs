#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbforge::drc::{run_drc, DrcConfig};
use tcbforge::layout::{validate_design, BoardDesign};

fuzz_target!(|data: &[u8]| {
    let Ok(board) = serde_json::from_slice::<BoardDesign>(data) else {
        return;
    };
    if validate_design(&board).is_empty() {
        let _ = run_drc(&board, &DrcConfig::default());
        let json = serde_json::to_vec(&board).unwrap();
        assert_eq!(serde_json::from_slice::<BoardDesign>(&json).unwrap(), board);
    }
});
