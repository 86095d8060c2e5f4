use super::FabricateError;
use crate::drc::{fmt_num, DrcReport, MaterialProfile, THRESHOLD_EPS};
use crate::layout::{trace_length, BoardDesign, Layer};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write};

/// Bed temperature, °C.
pub const BED_TEMP: f64 = 55.0;
/// PLA nozzle temperature, °C, and speed, mm/s.
pub const INSULATOR_TEMP: f64 = 205.0;
pub const INSULATOR_SPEED: f64 = 45.0;
/// Hot-air blower temperature for forming, °C.
pub const BEND_AIR_TEMP: f64 = 160.0;
pub const STIR_RPM: f64 = 400.0;
/// Room-temperature cure of silver paste joints, minutes.
pub const PASTE_CURE_MINUTES: f64 = 20.0;
/// Traces at or below this width get the long plating schedule, mm.
pub const FINE_TRACE_WIDTH: f64 = 0.6;

const NOZZLE: f64 = 0.4;
const SWAP_MINUTES: f64 = 3.0;
const BEND_MINUTES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Print,
    Bend,
    Plate,
    Assemble,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Print => "print",
            Phase::Bend => "bend",
            Phase::Plate => "plate",
            Phase::Assemble => "assemble",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessStep {
    pub phase: Phase,
    pub title: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Minutes.
    pub duration: f64,
}

impl ProcessStep {
    fn new(phase: Phase, title: impl Into<String>, duration: f64) -> Self {
        Self {
            phase,
            title: title.into(),
            parameters: BTreeMap::new(),
            notes: Vec::new(),
            duration,
        }
    }

    fn with(mut self, k: &str, v: f64) -> Self {
        self.parameters.insert(k.into(), v);
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPlan {
    pub board: String,
    pub steps: Vec<ProcessStep>,
}

impl ProcessPlan {
    pub fn phases(&self) -> Vec<Phase> {
        self.steps.iter().map(|s| s.phase).collect()
    }

    pub fn total_minutes(&self, phase: Phase) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.phase == phase)
            .map(|s| s.duration)
            .sum()
    }

    pub fn plating_minutes(&self) -> f64 {
        self.total_minutes(Phase::Plate)
    }

    /// True when phases never go backwards.
    pub fn is_ordered(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].phase <= w[1].phase)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "process plan for {}", self.board);
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                o,
                "{:>2}. [{}] {} ({} min)",
                i + 1,
                s.phase,
                s.title,
                fmt_num(s.duration)
            );
            for (k, v) in &s.parameters {
                let _ = writeln!(o, "      {k} = {}", fmt_num(*v));
            }
            for n in &s.notes {
                let _ = writeln!(o, "      - {n}");
            }
        }
        for p in [Phase::Print, Phase::Bend, Phase::Plate, Phase::Assemble] {
            let _ = writeln!(o, "total {p}: {} min", fmt_num(self.total_minutes(p)));
        }
        o
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Filament swaps when each layer prints its materials in the order that
/// continues with the one already loaded.
fn filament_swaps(layers: &[(bool, bool)]) -> usize {
    let mut current = true; // insulator loaded first
    let mut swaps = 0;
    for &(ins, cond) in layers {
        let need: Vec<bool> = match (ins, cond) {
            (true, true) => vec![current, !current],
            (true, false) => vec![true],
            (false, true) => vec![false],
            (false, false) => vec![],
        };
        for m in need {
            if m != current {
                swaps += 1;
                current = m;
            }
        }
    }
    swaps
}

pub fn plan_process(
    board: &BoardDesign,
    report: &DrcReport,
) -> Result<ProcessPlan, FabricateError> {
    plan_process_with(board, report, &MaterialProfile::default())
}

/// Print, then each bend in sequence order, then the staged plating schedule,
/// then assembly. Refuses while the report holds errors.
pub fn plan_process_with(
    board: &BoardDesign,
    report: &DrcReport,
    material: &MaterialProfile,
) -> Result<ProcessPlan, FabricateError> {
    let errors = report.count(crate::drc::Severity::Error);
    if errors > 0 {
        return Err(FabricateError::DrcErrors(errors));
    }
    let outline = board
        .planar_outline()
        .map_err(|e| FabricateError::Geometry(e.to_string()))?;
    let d = board.depth();
    let mut steps = Vec::new();

    // Print.
    let conductor_volume: f64 = board
        .traces
        .iter()
        .map(|t| trace_length(t, board) * t.width * t.height)
        .sum::<f64>()
        + board
            .vias
            .iter()
            .map(|v| PI * v.radius * v.radius * d)
            .sum::<f64>();
    let substrate_volume = (outline.area() * d - conductor_volume).max(0.0);
    let h = board.stackup.layer_heights;
    let has = |l: Layer| {
        board.traces.iter().any(|t| t.layer == l) || board.sockets.iter().any(|s| s.layer == l)
    };
    let through = !board.vias.is_empty();
    let layers = [
        (true, has(Layer::Bottom) || through),
        (true, through),
        (true, through),
        (true, has(Layer::Top) || through),
    ];
    let swaps = filament_swaps(&layers);
    let minutes = |vol: f64, layer: f64, speed: f64| vol / (NOZZLE * layer * speed) / 60.0;
    let mean_layer = h.iter().sum::<f64>() / 4.0;
    let print_time = minutes(substrate_volume, mean_layer, INSULATOR_SPEED)
        + minutes(conductor_volume, h[0].min(h[3]), material.print_speed)
        + swaps as f64 * SWAP_MINUTES;
    steps.push(
        ProcessStep::new(
            Phase::Print,
            "print substrate and traces flat, single extruder",
            print_time.ceil(),
        )
        .with("bed_temp_c", BED_TEMP)
        .with("insulator_temp_c", INSULATOR_TEMP)
        .with("insulator_speed_mm_s", INSULATOR_SPEED)
        .with("conductor_temp_c", material.print_temp)
        .with("conductor_speed_mm_s", material.print_speed)
        .with("nozzle_mm", NOZZLE)
        .with("filament_swaps", swaps as f64)
        .with("layer_bottom_mm", h[3])
        .with("layer_top_mm", h[0])
        .note("slice both STL files as one object with a virtual second extruder")
        .note("run the slicer output through `tcbforge gcode` to insert the filament swaps"),
    );

    // Bend.
    let mut bends: Vec<_> = board.bends.iter().collect();
    bends.sort_by(|a, b| a.sequence.cmp(&b.sequence).then_with(|| a.id.cmp(&b.id)));
    for b in bends {
        steps.push(
            ProcessStep::new(Phase::Bend, format!("bend `{}`", b.id), BEND_MINUTES)
                .with("air_temp_c", BEND_AIR_TEMP)
                .with("angle_deg", b.angle)
                .with("radius_mm", b.radius)
                .with("sequence", b.sequence as f64)
                .note(format!(
                    "heat along ({}, {}) to ({}, {}) until the part goes rubbery, form over a {} mm radius, hold until rigid",
                    fmt_num(b.from.x),
                    fmt_num(b.from.y),
                    fmt_num(b.to.x),
                    fmt_num(b.to.y),
                    fmt_num(b.radius)
                ))
                .note(format!("PLA softens above {} °C", fmt_num(material.glass_transition))),
        );
    }

    // Plate.
    let fine = board
        .traces
        .iter()
        .any(|t| t.width <= FINE_TRACE_WIDTH + THRESHOLD_EPS);
    let total = if fine { 120.0 } else { 60.0 };
    let stages = [
        (0.2, 20.0, "until copper spans every trace"),
        (0.3, 20.0, "ramp"),
        (0.4, total - 40.0, "finish"),
    ];
    for (volts, mins, what) in stages {
        let mut s = ProcessStep::new(
            Phase::Plate,
            format!("electroplate at {volts} V ({what})"),
            mins,
        )
        .with("voltage_v", volts)
        .with("stir_rpm", STIR_RPM);
        if volts == 0.2 {
            s = s.note("clip every net to the cathode before immersing; copper sulphate bath with two copper anodes");
        }
        if fine && volts == 0.4 {
            s = s.note(format!(
                "extended: a trace is {} mm wide or narrower",
                fmt_num(FINE_TRACE_WIDTH)
            ));
        }
        steps.push(s);
    }

    // Assemble.
    let mut sockets: Vec<_> = board.sockets.iter().collect();
    sockets.sort_by(|a, b| a.id.cmp(&b.id));
    for s in &sockets {
        steps.push(
            ProcessStep::new(
                Phase::Assemble,
                format!("press-fit pin into socket `{}`", s.id),
                1.0,
            )
            .with("radius_mm", s.radius)
            .with("depth_mm", s.depth),
        );
    }
    steps.push(
        ProcessStep::new(Phase::Assemble, "silver paste joints", PASTE_CURE_MINUTES)
            .with("joints", sockets.len() as f64)
            .with("cure_min", PASTE_CURE_MINUTES)
            .note("apply conductive silver paste to each component lead and socket, cure at room temperature")
            .note("cover cured joints with superglue to fix components"),
    );

    Ok(ProcessPlan {
        board: board.name.clone(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_count() {
        assert_eq!(
            filament_swaps(&[(true, true), (true, false), (true, false), (true, true)]),
            3
        );
        assert_eq!(filament_swaps(&[(true, true); 4]), 4);
        assert_eq!(filament_swaps(&[(true, false); 4]), 0);
    }
}
