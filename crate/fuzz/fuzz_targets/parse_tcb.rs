#![no_main]

use libfuzzer_sys::fuzz_target;
use tcbforge::dsl::{parse, parse_bytes, serialize};

fuzz_target!(|data: &[u8]| {
    let Ok(board) = parse_bytes(data) else { return };
    // Anything that parses must print and parse back to the same model.
    let text = serialize(&board).expect("parsed board serializes");
    assert_eq!(parse(&text).expect("serialized board parses"), board);
});
