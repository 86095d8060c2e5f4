mod common;

use common::{board_from, random_board, LED_SAMPLE};
use tcbforge::drc::{run_drc, DrcConfig, DrcReport};
use tcbforge::fabricate::{plan_process, FabricateError, Phase, BEND_AIR_TEMP, STIR_RPM};
use tcbforge::layout::BoardDesign;

fn plan_of(b: &BoardDesign) -> tcbforge::fabricate::ProcessPlan {
    plan_process(b, &DrcReport::new(Vec::new())).unwrap()
}

#[test]
fn small_board_plates_for_an_hour() {
    let b = board_from(LED_SAMPLE);
    let plan = plan_process(&b, &run_drc(&b, &DrcConfig::default())).unwrap();
    assert_eq!(plan.plating_minutes(), 60.0);
    let volts: Vec<f64> = plan
        .steps
        .iter()
        .filter(|s| s.phase == Phase::Plate)
        .map(|s| s.parameters["voltage_v"])
        .collect();
    assert_eq!(volts, [0.2, 0.3, 0.4]);
    assert!(plan
        .steps
        .iter()
        .filter(|s| s.phase == Phase::Plate)
        .all(|s| s.parameters["stir_rpm"] == STIR_RPM));
}

#[test]
fn fine_trace_extends_plating() {
    for (w, minutes) in [(0.5, 120.0), (0.6, 120.0), (0.61, 60.0), (1.0, 60.0)] {
        let b = board_from(&format!(
            "board {{ outline rect 30 20; stackup 0.3 0.3 0.3 0.3\n trace t {{ path (0,0) (4,0); width {w} }}\n}}"
        ));
        assert_eq!(plan_of(&b).plating_minutes(), minutes, "width {w}");
    }
}

#[test]
fn bends_follow_sequence() {
    let b = board_from(
        "board { outline rect 90 20; stackup 0.3 0.3 0.3 0.3
  bend c { axis (20,-1) (20,21); angle 30; sequence 3 }
  bend a { axis (45,-1) (45,21); angle 45; sequence 1 }
  bend b { axis (70,-1) (70,21); angle -30; sequence 2 }
}",
    );
    let plan = plan_of(&b);
    let bends: Vec<&str> = plan
        .steps
        .iter()
        .filter(|s| s.phase == Phase::Bend)
        .map(|s| s.title.as_str())
        .collect();
    assert_eq!(bends, ["bend `a`", "bend `b`", "bend `c`"]);
    assert!(plan
        .steps
        .iter()
        .filter(|s| s.phase == Phase::Bend)
        .all(|s| s.parameters["air_temp_c"] == BEND_AIR_TEMP));
}

#[test]
fn drc_errors_block_the_plan() {
    let b = board_from("board { outline rect 30 20; stackup 0.3 0.3 0.3 0.3\n trace t { path (0,0) (4,0); width 0.4 }\n}");
    let r = run_drc(&b, &DrcConfig::default());
    assert_eq!(plan_process(&b, &r), Err(FabricateError::DrcErrors(1)));
}

#[test]
fn phases_in_order_on_random_boards() {
    for seed in 0..100 {
        let b = random_board(seed);
        let plan = plan_of(&b);
        assert!(plan.is_ordered(), "seed {seed}");
        let mut phases = plan.phases();
        phases.dedup();
        let expected: Vec<Phase> = [Phase::Print, Phase::Bend, Phase::Plate, Phase::Assemble]
            .into_iter()
            .filter(|p| *p != Phase::Bend || !b.bends.is_empty())
            .collect();
        assert_eq!(phases, expected, "seed {seed}");
        assert_eq!(
            plan.phases().iter().filter(|p| **p == Phase::Bend).count(),
            b.bends.len()
        );
        assert!(plan.plating_minutes() >= 60.0);
    }
}

#[test]
fn assembly_lists_paste_cure_and_sockets() {
    let b = board_from(LED_SAMPLE);
    let plan = plan_of(&b);
    let assemble: Vec<_> = plan
        .steps
        .iter()
        .filter(|s| s.phase == Phase::Assemble)
        .collect();
    assert_eq!(assemble.len(), b.sockets.len() + 1);
    let paste = assemble.last().unwrap();
    assert_eq!(paste.parameters["cure_min"], 20.0);
    let text = plan.to_text();
    assert!(text.starts_with("process plan for led_board\n"));
    assert!(text.contains("total plate: 60 min"));
    let json: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
    assert_eq!(json["steps"][0]["phase"], "print");
}
