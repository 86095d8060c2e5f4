use crate::drc::MaterialProfile;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;
use thiserror::Error;

/// Comment tag on every injected line; its presence marks a patched file.
pub const PATCH_MARKER: &str = "; tcbforge";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcodeError {
    #[error("line {line}: input is not valid UTF-8")]
    Encoding { line: usize },
    #[error("line {line}: tool number `{text}` is out of range")]
    BadTool { line: usize, text: String },
    #[error("line {line}: no material profile for tool T{tool}")]
    UnknownTool { line: usize, tool: u32 },
}

/// Raw lines (each keeping its own line terminator) and the tool selections found in them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcodeProgram {
    pub lines: Vec<String>,
    /// `(line index, tool)`, strictly increasing in line index.
    pub tool_events: Vec<(usize, u32)>,
}

impl GcodeProgram {
    pub fn text(&self) -> String {
        self.lines.concat()
    }

    pub fn is_patched(&self) -> bool {
        self.lines.iter().any(|l| l.contains(PATCH_MARKER))
    }
}

/// Code part of a line: comment stripped, surrounding whitespace trimmed.
fn code(line: &str) -> &str {
    line.split(';').next().unwrap_or("").trim()
}

/// `Some(Ok(n))` for a `T<n>` command word.
fn tool_word(line: &str) -> Option<Result<u32, String>> {
    let word = code(line).split_whitespace().next()?;
    let digits = word.strip_prefix('T').or_else(|| word.strip_prefix('t'))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse::<u32>().map_err(|_| word.to_string()))
}

pub fn parse_gcode(text: &str) -> Result<GcodeProgram, GcodeError> {
    let lines: Vec<String> = text.split_inclusive('\n').map(str::to_string).collect();
    let mut tool_events = Vec::new();
    for (i, l) in lines.iter().enumerate() {
        match tool_word(l) {
            Some(Ok(t)) => tool_events.push((i, t)),
            Some(Err(text)) => return Err(GcodeError::BadTool { line: i + 1, text }),
            None => {}
        }
    }
    Ok(GcodeProgram { lines, tool_events })
}

pub fn parse_gcode_bytes(bytes: &[u8]) -> Result<GcodeProgram, GcodeError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_gcode(s),
        Err(e) => {
            let line = bytes[..e.valid_up_to()]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            Err(GcodeError::Encoding { line })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolProfile {
    pub name: String,
    /// Nozzle temperature, °C.
    pub temperature: f64,
    /// Target print speed, mm/s.
    pub speed: f64,
    pub conductive: bool,
}

impl ToolProfile {
    pub fn insulator() -> Self {
        Self {
            name: "PLA".into(),
            temperature: super::INSULATOR_TEMP,
            speed: super::INSULATOR_SPEED,
            conductive: false,
        }
    }

    pub fn conductive(material: &MaterialProfile) -> Self {
        Self {
            name: material.name.clone(),
            temperature: material.print_temp,
            speed: material.print_speed,
            conductive: true,
        }
    }
}

/// Material per tool number.
pub type ToolTable = BTreeMap<u32, ToolProfile>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GcodeDialect {
    /// Prusa / Marlin: `M104`, `M600`, `M220`.
    #[default]
    Prusa,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedMode {
    /// Leave speeds to the slicer.
    None,
    /// Insert `M220 S<percent>` after each swap, scaled from `sliced_speed`.
    #[default]
    M220,
    /// Rewrite the `F` word of extruding moves while a conductive tool is active.
    Feedrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    pub dialect: GcodeDialect,
    pub speed: SpeedMode,
    /// Speed the slicer planned for, mm/s; the `M220` percentage is relative to it.
    pub sliced_speed: f64,
    pub purge_comment: bool,
}

impl Default for PatchOptions {
    fn default() -> Self {
        Self {
            dialect: GcodeDialect::Prusa,
            speed: SpeedMode::M220,
            sliced_speed: 45.0,
            purge_comment: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatchSummary {
    /// Tool changes replaced by a temperature change and filament swap.
    pub swaps: usize,
    /// Whether a leading tool selection became a temperature-only line.
    pub initial_selection: bool,
    /// `(output line number, °C)` for every injected `M104`.
    pub temperatures: Vec<(usize, f64)>,
    /// Extruding moves whose feedrate was rewritten.
    pub feedrates_rewritten: usize,
    pub already_patched: bool,
}

impl PatchSummary {
    pub fn changed(&self) -> bool {
        self.swaps > 0 || self.initial_selection || self.feedrates_rewritten > 0
    }
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// True for a move that pushes filament (positive `E` word).
fn is_extrusion(code: &str) -> bool {
    let mut words = code.split_whitespace();
    let Some(cmd) = words.next() else {
        return false;
    };
    if !matches!(
        cmd.to_ascii_uppercase().as_str(),
        "G1" | "G2" | "G3" | "G01" | "G02" | "G03"
    ) {
        return false;
    }
    words.any(|w| {
        (w.starts_with('E') || w.starts_with('e')) && w[1..].parse::<f64>().is_ok_and(|e| e > 0.0)
    })
}

fn rewrite_feedrate(line: &str, feed: f64) -> Option<String> {
    let body_end = line.find(['\r', '\n']).unwrap_or(line.len());
    let (body, ending) = line.split_at(body_end);
    let (code_part, comment) = match body.find(';') {
        Some(i) => body.split_at(i),
        None => (body, ""),
    };
    let mut found = false;
    let words: Vec<String> = code_part
        .split_whitespace()
        .map(|w| {
            if w.starts_with('F') || w.starts_with('f') {
                found = true;
                format!("F{}", fmt_value(feed))
            } else {
                w.to_string()
            }
        })
        .collect();
    let mut out = words.join(" ");
    if !found {
        let _ = write!(out, " F{}", fmt_value(feed));
    }
    if !comment.is_empty() {
        out.push(' ');
        out.push_str(comment);
    }
    out.push_str(ending);
    (out != line).then_some(out)
}

/// Replaces every tool selection with a temperature change and an `M600`
/// filament swap for the incoming material. A selection before the first
/// extrusion only sets the temperature. Every other line is copied unchanged
/// unless [`SpeedMode::Feedrate`] is chosen.
pub fn patch_gcode(
    program: &GcodeProgram,
    tools: &ToolTable,
    options: &PatchOptions,
) -> Result<(GcodeProgram, PatchSummary), GcodeError> {
    let mut summary = PatchSummary {
        already_patched: program.is_patched(),
        ..Default::default()
    };
    for &(i, t) in &program.tool_events {
        if !tools.contains_key(&t) {
            return Err(GcodeError::UnknownTool {
                line: i + 1,
                tool: t,
            });
        }
    }
    let events: BTreeMap<usize, u32> = program.tool_events.iter().copied().collect();
    let mut lines: Vec<String> = Vec::with_capacity(program.lines.len() + 4 * events.len());
    let mut extruded = false;
    let mut active: Option<&ToolProfile> = None;
    for (i, line) in program.lines.iter().enumerate() {
        if let Some(&t) = events.get(&i) {
            let p = &tools[&t];
            // Injected lines are always LF; copied lines keep their own terminator.
            let nl = "\n";
            let temp = format!(
                "M104 S{} {PATCH_MARKER} T{t} {}{nl}",
                fmt_value(p.temperature),
                p.name
            );
            lines.push(temp);
            summary.temperatures.push((lines.len(), p.temperature));
            if extruded {
                lines.push(format!("M600 {PATCH_MARKER} swap filament for T{t}{nl}"));
                if options.purge_comment {
                    lines.push(format!(
                        "{PATCH_MARKER} purge: extrude until the nozzle runs clean of the previous material{nl}"
                    ));
                    lines.push(format!(
                        "{PATCH_MARKER} purge: check no conductive residue is left on the part before resuming{nl}"
                    ));
                }
                summary.swaps += 1;
            } else {
                summary.initial_selection = true;
            }
            if options.speed == SpeedMode::M220 && options.sliced_speed > 0.0 {
                let pct = (100.0 * p.speed / options.sliced_speed)
                    .round()
                    .clamp(1.0, 999.0);
                lines.push(format!(
                    "M220 S{} {PATCH_MARKER} {} mm/s{nl}",
                    fmt_value(pct),
                    fmt_value(p.speed)
                ));
            }
            active = Some(p);
            continue;
        }
        let c = code(line);
        let extrudes = is_extrusion(c);
        if extrudes && options.speed == SpeedMode::Feedrate {
            if let Some(p) = active.filter(|p| p.conductive) {
                if let Some(new) = rewrite_feedrate(line, p.speed * 60.0) {
                    lines.push(new);
                    summary.feedrates_rewritten += 1;
                    extruded = true;
                    continue;
                }
            }
        }
        extruded |= extrudes;
        lines.push(line.clone());
    }
    Ok((
        GcodeProgram {
            lines,
            tool_events: Vec::new(),
        },
        summary,
    ))
}
