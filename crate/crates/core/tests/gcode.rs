use proptest::prelude::*;
use std::collections::BTreeMap;
use tcbforge::drc::MaterialProfile;
use tcbforge::fabricate::{
    parse_gcode, patch_gcode, GcodeError, PatchOptions, SpeedMode, ToolProfile, ToolTable,
    PATCH_MARKER,
};

fn tools() -> ToolTable {
    BTreeMap::from([
        (0, ToolProfile::insulator()),
        (1, ToolProfile::conductive(&MaterialProfile::default())),
    ])
}

/// Shape of a two-tool Prusa slicer export: start block, insulator layer,
/// conductor segment, back to the insulator.
const TWO_TOOL: &str = include_str!("../samples/two_tool_prusa.gcode");

fn patch(text: &str, opts: &PatchOptions) -> String {
    let p = parse_gcode(text).unwrap();
    patch_gcode(&p, &tools(), opts).unwrap().0.text()
}

#[test]
fn two_tool_file_gains_one_swap_per_material() {
    let out = patch(TWO_TOOL, &PatchOptions::default());
    let lines: Vec<&str> = out.lines().collect();
    let pairs = |temp: &str| {
        lines
            .windows(2)
            .filter(|w| w[0].starts_with(&format!("M104 S{temp} ")) && w[1].starts_with("M600"))
            .count()
    };
    assert_eq!(pairs("150"), 1, "{out}");
    assert_eq!(pairs("205"), 1, "{out}");
    assert_eq!(lines.iter().filter(|l| l.starts_with("M600")).count(), 2);
    // The leading T0 only sets the insulator temperature.
    assert_eq!(
        lines.iter().filter(|l| l.starts_with("M104 S205 ")).count(),
        2
    );
    assert!(!lines.iter().any(|l| l.trim() == "T0" || l.trim() == "T1"));
}

/// Input with tool lines removed equals output with injected lines removed.
fn untouched_lines_survive(input: &str, output: &str) -> bool {
    let kept: Vec<&str> = input
        .split_inclusive('\n')
        .filter(|l| !matches!(l.split(';').next().unwrap_or("").split_whitespace().next(), Some(w) if w.len() > 1 && w[1..].bytes().all(|b| b.is_ascii_digit()) && (w.starts_with('T') || w.starts_with('t'))))
        .collect();
    let rest: Vec<&str> = output
        .split_inclusive('\n')
        .filter(|l| !l.contains(PATCH_MARKER))
        .collect();
    kept == rest
}

#[test]
fn other_lines_are_byte_identical() {
    let out = patch(TWO_TOOL, &PatchOptions::default());
    assert!(untouched_lines_survive(TWO_TOOL, &out));
}

#[test]
fn patching_twice_changes_nothing() {
    let once = patch(TWO_TOOL, &PatchOptions::default());
    let p = parse_gcode(&once).unwrap();
    assert!(p.is_patched());
    let (twice, summary) = patch_gcode(&p, &tools(), &PatchOptions::default()).unwrap();
    assert_eq!(twice.text(), once);
    assert!(summary.already_patched && !summary.changed());
}

#[test]
fn speed_override_targets_conductor() {
    let out = patch(TWO_TOOL, &PatchOptions::default());
    // 10 mm/s against a 45 mm/s slice is 22 %, then back to 100 %.
    assert!(out.contains("M220 S22 "));
    assert!(out.contains("M220 S100 "));
    let none = patch(
        TWO_TOOL,
        &PatchOptions {
            speed: SpeedMode::None,
            ..Default::default()
        },
    );
    assert!(!none.contains("M220"));
    let plain = patch(
        TWO_TOOL,
        &PatchOptions {
            purge_comment: false,
            speed: SpeedMode::None,
            ..Default::default()
        },
    );
    assert_eq!(plain.lines().count(), TWO_TOOL.lines().count() + 2);
}

#[test]
fn no_tool_changes_is_a_copy() {
    let text = "G28\nG1 X1 E1\n";
    let p = parse_gcode(text).unwrap();
    let (out, s) = patch_gcode(&p, &tools(), &PatchOptions::default()).unwrap();
    assert_eq!(out.text(), text);
    assert!(!s.changed() && !s.already_patched);
}

#[test]
fn unknown_tool_is_an_error() {
    let p = parse_gcode("T0\nG1 X1 E1\nT2\n").unwrap();
    assert_eq!(
        patch_gcode(&p, &tools(), &PatchOptions::default()),
        Err(GcodeError::UnknownTool { line: 3, tool: 2 })
    );
}

fn program() -> impl Strategy<Value = String> {
    let line = prop_oneof![
        Just("G1 X1 Y2 E0.5\n".to_string()),
        Just("G1 X3 F3000\n".to_string()),
        Just(";LAYER_CHANGE\n".to_string()),
        Just("M106 S255\n".to_string()),
        Just("T0\n".to_string()),
        Just("T1 ; tool\n".to_string()),
        Just("\n".to_string()),
        "[ -~]{0,20}\n",
    ];
    prop::collection::vec(line, 0..60).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn patch_conserves_and_is_idempotent(text in program()) {
        let Ok(p) = parse_gcode(&text) else { return Ok(()) };
        if p.tool_events.iter().any(|&(_, t)| t > 1) {
            return Ok(());
        }
        let (out, s) = patch_gcode(&p, &tools(), &PatchOptions::default()).unwrap();
        prop_assert!(untouched_lines_survive(&text, &out.text()));
        prop_assert_eq!(s.temperatures.len(), p.tool_events.len());
        let again = parse_gcode(&out.text()).unwrap();
        let (twice, _) = patch_gcode(&again, &tools(), &PatchOptions::default()).unwrap();
        prop_assert_eq!(twice.text(), out.text());
    }
}
