//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so the
//! lines show up in `cargo test` output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/common/mod.rs"]
mod common;

use common::{board_from, fuzz_inputs, random_board, HOTWIRE_SAMPLE, LED_SAMPLE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};
use tcbforge::drc::{
    check_geometry, estimate_trace_resistance, run_drc, DrcConfig, MaterialProfile, Severity,
};
use tcbforge::dsl::{parse, parse_bytes, serialize};
use tcbforge::fabricate::{
    export_stl, generate_solids, parse_gcode, patch_gcode, plan_process, PatchOptions, Phase,
    ToolProfile,
};
use tcbforge::geometry::{
    deflection_angle, flexural_strain, BendLine, FoldMap, Mesh, Point2, Point3,
};
use tcbforge::layout::BoardDesign;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn resistance_model() -> Outcome {
    let start = Instant::now();
    let cfg = DrcConfig::default();
    let board_with = |bend: Option<f64>| {
        let bend = bend.map_or(String::new(), |a| {
            format!("bend b {{ axis (30,-1) (30,11); angle {a}; radius 3 }}")
        });
        board_from(&format!(
            "board {{ outline rect 60 10; pitch 1; margin 5; stackup 0.5 0.3 0.3 0.5
  trace t {{ path (0,0) (50,0); width 1.3; height 0.5 }}
  {bend}
}}"
        ))
    };
    let measured = [
        (None, 10.2, 0.10),
        (Some(15.0), 10.6, 0.2),
        (Some(45.0), 10.9, 0.2),
        (Some(90.0), 15.7, 0.2),
    ];
    for (bend, unplated, plated) in measured {
        let b = board_with(bend);
        let u =
            estimate_trace_resistance(&b.traces[0], &b, false, &cfg).map_err(|e| e.to_string())?;
        let p =
            estimate_trace_resistance(&b.traces[0], &b, true, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            within(u, unplated, 0.02),
            "bend {bend:?}: unplated {u:.3} vs {unplated}"
        );
        ensure!(
            within(p, plated, 0.02),
            "bend {bend:?}: plated {p:.4} vs {plated}"
        );
    }
    ensure!(
        start.elapsed() < Duration::from_secs(1),
        "took {:?}",
        start.elapsed()
    );
    Ok(())
}

fn strain_suite() -> Outcome {
    for (d, strain, obtuse) in [
        (3.75, 0.0127, 158.76),
        (3.25, 0.0110, 161.54),
        (3.5, 0.0118, 160.15),
    ] {
        let e = flexural_strain(d, 0.9, 40.0).map_err(|e| e.to_string())?;
        ensure!(
            (e - strain).abs() <= 0.0002,
            "strain at D={d}: {e:.5} vs {strain}"
        );
        let a = 180.0 - deflection_angle(d, 40.0).map_err(|e| e.to_string())?;
        ensure!(
            (a - obtuse).abs() <= 0.02,
            "angle at D={d}: {a:.3} vs {obtuse}"
        );
    }
    Ok(())
}

fn errors_of(b: &BoardDesign, rule: &str) -> usize {
    check_geometry(b, &DrcConfig::default())
        .iter()
        .filter(|f| f.rule_id == rule && f.severity == Severity::Error)
        .count()
}

fn drc_floor() -> Outcome {
    let single = |w: f64| {
        board_from(&format!(
            "board {{ outline rect 30 20; stackup 0.3 0.3 0.3 0.3\n trace a {{ path (0,0) (5,0); width {w} }}\n}}"
        ))
    };
    ensure!(
        errors_of(&single(0.4), "geometry.width") == 1,
        "0.4 mm trace not flagged"
    );
    ensure!(
        errors_of(&single(0.5), "geometry.width") == 0,
        "0.5 mm trace flagged"
    );
    // Centrelines one pitch apart with 1 mm traces: clearance = pitch - 1.
    let rows = |pitch: f64| {
        board_from(&format!(
            "board {{ outline rect 30 20; pitch {pitch}; margin 2; stackup 0.3 0.3 0.3 0.3
  trace a {{ path (0,0) (8,0); width 1 }}
  trace b {{ path (0,1) (8,1); width 1 }}
}}"
        ))
    };
    ensure!(
        errors_of(&rows(1.4), "geometry.spacing") == 1,
        "0.4 mm clearance not flagged"
    );
    ensure!(
        errors_of(&rows(1.5), "geometry.spacing") == 0,
        "0.5 mm clearance flagged"
    );
    Ok(())
}

fn dsl_properties() -> Outcome {
    for seed in 0..1000 {
        let b = random_board(seed);
        let text = serialize(&b).map_err(|e| format!("seed {seed}: {e:?}"))?;
        let back = parse(&text).map_err(|e| format!("seed {seed}: {e:?}"))?;
        ensure!(back == b, "seed {seed}: round trip changed the board");
    }
    let start = Instant::now();
    let inputs = fuzz_inputs(10_000, 0xacce);
    for (i, input) in inputs.iter().enumerate() {
        let r = std::panic::catch_unwind(|| parse_bytes(input));
        match r {
            Err(_) => return Err(format!("input {i} panicked")),
            Ok(Err(errs)) => ensure!(!errs.is_empty(), "input {i}: failure without errors"),
            Ok(Ok(_)) => {}
        }
    }
    ensure!(
        start.elapsed() < Duration::from_secs(60),
        "fuzz took {:?}",
        start.elapsed()
    );
    Ok(())
}

/// Each undirected edge used by exactly two triangles.
fn closed(m: &Mesh) -> bool {
    let mut uses: HashMap<(u32, u32), u32> = HashMap::new();
    for t in &m.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    !uses.is_empty() && uses.values().all(|&n| n == 2)
}

/// Divergence theorem over z, independent of the library's own volume.
fn volume(m: &Mesh) -> f64 {
    m.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| m.vertices[i as usize]);
            0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) * (a.z + b.z + c.z) / 3.0
        })
        .sum()
}

fn geometry_oracles() -> Outcome {
    let straight = board_from(
        "board { outline rect 60 10; pitch 1; margin 5; stackup 0.5 0.3 0.3 0.5
  trace t { path (0,0) (50,0); width 1.3; height 0.5 }
}",
    );
    let s = generate_solids(&straight).map_err(|e| e.to_string())?;
    let v = volume(&s.conductor);
    ensure!(
        (v - 50.0 * 1.3 * 0.5).abs() <= 1e-3,
        "straight trace volume {v}"
    );

    let via = board_from(
        "board { outline rect 20 20; stackup 0.3 0.3 0.3 0.3\n via v { at (3,3); radius 0.6 }\n}",
    );
    let s = generate_solids(&via).map_err(|e| e.to_string())?;
    let bore = 400.0 * 1.2 - volume(&s.substrate) - volume(&s.conductor);
    let analytic = PI * 0.15 * 0.15 * 1.2;
    ensure!(
        within(bore, analytic, 0.005),
        "via bore {bore} vs {analytic}"
    );

    for (name, text) in [("led", LED_SAMPLE), ("hotwire", HOTWIRE_SAMPLE)] {
        let s = generate_solids(&board_from(text)).map_err(|e| e.to_string())?;
        ensure!(
            closed(&s.substrate) && closed(&s.conductor),
            "{name} solids not closed"
        );
    }
    for seed in 0..40 {
        if let Ok(s) = generate_solids(&random_board(seed)) {
            ensure!(
                closed(&s.substrate),
                "random board {seed}: substrate not closed"
            );
            ensure!(
                s.conductor.is_empty() || closed(&s.conductor),
                "random board {seed}: conductor not closed"
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x150);
    for i in 0..100 {
        let tilt: f64 = rng.gen_range(-0.4..0.4);
        let dir = Point2::new(tilt.sin(), tilt.cos());
        let normal = Point2::new(dir.y, -dir.x);
        let bends: Vec<BendLine> = (0..rng.gen_range(1..=3))
            .map(|k| {
                let c = Point2::new(50.0, 30.0)
                    + normal * (30.0 * k as f64 - 30.0 + rng.gen_range(-3.0..3.0));
                BendLine {
                    id: format!("b{k}"),
                    from: c - dir * 80.0,
                    to: c + dir * 80.0,
                    angle: rng.gen_range(-60.0..60.0),
                    radius: rng.gen_range(1.0..5.0),
                    sequence: k,
                }
            })
            .collect();
        let map = FoldMap::new(&bends).map_err(|e| e.to_string())?;
        let pts: Vec<Point2> = (0..rng.gen_range(2..6))
            .map(|_| Point2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..60.0)))
            .collect();
        let mut flat = 0.0;
        let mut folded = 0.0;
        for w in pts.windows(2) {
            flat += w[0].distance(w[1]);
            let n = ((w[0].distance(w[1]) / 2e-3).ceil() as usize).max(1);
            let mut prev = map.map_point(Point3::new(w[0].x, w[0].y, 0.0));
            for k in 1..=n {
                let p = w[0] + (w[1] - w[0]) * (k as f64 / n as f64);
                let q = map.map_point(Point3::new(p.x, p.y, 0.0));
                folded += q.distance(prev);
                prev = q;
            }
        }
        ensure!(
            (folded - flat).abs() <= 1e-6,
            "polyline {i}: folded {folded} vs flat {flat}"
        );
    }
    Ok(())
}

fn gcode_corpus() -> Outcome {
    let text = include_str!("../../core/samples/two_tool_prusa.gcode");
    let tools = BTreeMap::from([
        (0, ToolProfile::insulator()),
        (1, ToolProfile::conductive(&MaterialProfile::default())),
    ]);
    let opts = PatchOptions::default();
    let program = parse_gcode(text).map_err(|e| e.to_string())?;
    let (once, _) = patch_gcode(&program, &tools, &opts).map_err(|e| e.to_string())?;
    let out = once.text();
    let lines: Vec<&str> = out.lines().collect();
    // A temperature change followed closely by a filament swap.
    let pair = |temp: &str| {
        (0..lines.len())
            .filter(|&i| lines[i].starts_with(&format!("M104 S{temp}")))
            .filter(|&i| lines[i + 1..].iter().take(3).any(|l| l.starts_with("M600")))
            .count()
    };
    let m600 = lines.iter().filter(|l| l.starts_with("M600")).count();
    ensure!(m600 == 2, "{m600} filament swaps");
    ensure!(pair("150") == 1, "{} conductive swap pairs", pair("150"));
    ensure!(pair("205") == 1, "{} insulator swap pairs", pair("205"));

    // Every original line that is not a tool change survives, in order.
    let mut rest = lines.iter();
    for l in text.lines().filter(|l| !l.trim_start().starts_with('T')) {
        ensure!(rest.any(|o| o == &l), "line lost: {l}");
    }
    let (twice, summary) = patch_gcode(&once, &tools, &opts).map_err(|e| e.to_string())?;
    ensure!(
        !summary.changed() && twice.text() == out,
        "second patch changed the file"
    );
    Ok(())
}

fn process_plan() -> Outcome {
    let led = board_from(LED_SAMPLE);
    let plan =
        plan_process(&led, &run_drc(&led, &DrcConfig::default())).map_err(|e| e.to_string())?;
    ensure!(
        plan.plating_minutes() == 60.0,
        "small board plates {} min",
        plan.plating_minutes()
    );
    for w in [0.5, 0.6] {
        let b = board_from(&format!(
            "board {{ outline rect 30 20; stackup 0.3 0.3 0.3 0.3\n trace t {{ path (0,0) (4,0); width {w} }}\n}}"
        ));
        let plan =
            plan_process(&b, &run_drc(&b, &DrcConfig::default())).map_err(|e| e.to_string())?;
        ensure!(
            plan.plating_minutes() == 120.0,
            "{w} mm trace plates {} min",
            plan.plating_minutes()
        );
    }
    let empty = tcbforge::drc::DrcReport::new(Vec::new());
    for seed in 0..100 {
        let b = random_board(seed);
        let plan = plan_process(&b, &empty).map_err(|e| e.to_string())?;
        let rank = |p: Phase| {
            [Phase::Print, Phase::Bend, Phase::Plate, Phase::Assemble]
                .iter()
                .position(|q| *q == p)
        };
        let ranks: Vec<_> = plan.steps.iter().map(|s| rank(s.phase)).collect();
        ensure!(
            ranks.windows(2).all(|w| w[0] <= w[1]),
            "seed {seed}: phases out of order"
        );
        ensure!(
            plan.steps.first().map(|s| s.phase) == Some(Phase::Print),
            "seed {seed}: does not start with print"
        );
        ensure!(
            plan.steps.last().map(|s| s.phase) == Some(Phase::Assemble),
            "seed {seed}: does not end with assembly"
        );
    }
    Ok(())
}

fn end_to_end() -> Outcome {
    let hot = board_from(HOTWIRE_SAMPLE);
    let report = run_drc(&hot, &DrcConfig::default());
    let currents: Vec<_> = report
        .findings
        .iter()
        .filter(|f| f.rule_id.starts_with("current."))
        .collect();
    ensure!(currents.len() == 2, "{} current findings", currents.len());
    ensure!(
        currents.iter().all(|f| f.severity != Severity::Error),
        "current check fails"
    );
    ensure!(
        currents.iter().all(|f| f.evidence["current_a"] == 2.52),
        "current not 2.52 A"
    );

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let samples = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/samples");
    let start = Instant::now();
    for stem in ["led_board", "hotwire_cutter"] {
        let o = Command::new(env!("CARGO_BIN_EXE_tcbforge"))
            .arg("compile")
            .arg(samples.join(format!("{stem}.tcb")))
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(
            o.status.code() == Some(0),
            "{stem}: exit {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        );
        for suffix in ["_substrate.stl", "_conductor.stl"] {
            let bytes = std::fs::read(dir.path().join(format!("{stem}{suffix}")))
                .map_err(|e| e.to_string())?;
            let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
            ensure!(
                n > 0 && bytes.len() == 84 + 50 * n,
                "{stem}{suffix}: malformed STL"
            );
        }
        let plan = std::fs::read_to_string(dir.path().join(format!("{stem}_plan.txt")))
            .map_err(|e| e.to_string())?;
        ensure!(
            plan.starts_with(&format!("process plan for {stem}")),
            "{stem}: bad plan"
        );
    }
    ensure!(
        start.elapsed() < Duration::from_secs(10),
        "took {:?}",
        start.elapsed()
    );
    // The STL writer output is what the binary wrote.
    let led = generate_solids(&board_from(LED_SAMPLE)).map_err(|e| e.to_string())?;
    let written =
        std::fs::read(dir.path().join("led_board_substrate.stl")).map_err(|e| e.to_string())?;
    ensure!(
        export_stl(&led.substrate).map_err(|e| e.to_string())? == written,
        "STL differs from library export"
    );
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "resistance model reproduces the measured table",
            resistance_model,
        ),
        (
            "strain and deflection angle match the bending samples",
            strain_suite,
        ),
        ("DRC width and clearance floor at 0.5 mm", drc_floor),
        (
            "DSL round trip on 1000 boards and 10000 fuzz inputs",
            dsl_properties,
        ),
        (
            "geometry oracles: volumes, closed solids, fold isometry",
            geometry_oracles,
        ),
        ("G-code two-tool patch and idempotence", gcode_corpus),
        ("process plan durations and phase order", process_plan),
        ("end-to-end compile of bundled samples", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("PASS  {name} ({ms} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({ms} ms): {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
