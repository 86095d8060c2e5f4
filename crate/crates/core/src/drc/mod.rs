//! Design-rule checks and electrical estimates: trace width and spacing,
//! bend-aware resistance, current limits and flex-fracture risk.

mod checks;
mod config;
mod resistance;

use crate::geometry::GridIndex;
use crate::layout::{validate_design, BoardDesign};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write};
use thiserror::Error;

pub use checks::{check_bends, check_current, check_flex, check_geometry, COMPONENT_SPACING};
pub use config::{parse_override, BendPenaltyTable, DrcConfig, MaterialProfile, OVERRIDE_KEYS};
pub use resistance::{
    bend_crossings, estimate_trace_resistance, resistance_breakdown, BendCrossing,
    ResistanceEstimate,
};

/// Tolerance applied to every threshold comparison.
pub const THRESHOLD_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DrcError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<GridIndex>,
    /// Second element of a pairwise finding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub related: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
    pub evidence: BTreeMap<String, f64>,
}

impl Finding {
    pub fn new(rule_id: &str, severity: Severity, message: String) -> Self {
        Self {
            rule_id: rule_id.into(),
            severity,
            location: Location::default(),
            message,
            evidence: BTreeMap::new(),
        }
    }

    pub fn element(mut self, id: &str) -> Self {
        self.location.element = Some(id.into());
        self
    }

    pub fn at(mut self, index: GridIndex) -> Self {
        self.location.index = Some(index);
        self
    }

    pub fn related(mut self, id: &str) -> Self {
        self.location.related = Some(id.into());
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.into(), value);
        self
    }

    fn sort_key(&self) -> (&str, &Location, &str, Severity) {
        (&self.rule_id, &self.location, &self.message, self.severity)
    }
}

/// Findings in rule-id, then element order. No findings means the board passes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DrcReport {
    pub findings: Vec<Finding>,
}

impl DrcReport {
    pub fn new(mut findings: Vec<Finding>) -> Self {
        findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Self { findings }
    }

    pub fn count(&self, severity: Severity) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == severity)
            .count()
    }

    pub fn has_errors(&self) -> bool {
        self.count(Severity::Error) > 0
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn by_rule<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.rule_id == rule)
    }

    pub fn summary(&self) -> String {
        format!(
            "{} error(s), {} warning(s), {} info",
            self.count(Severity::Error),
            self.count(Severity::Warning),
            self.count(Severity::Info)
        )
    }

    /// One line per finding, then a summary line.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        for f in &self.findings {
            let _ = write!(o, "{:<7} {}", f.severity.as_str(), f.rule_id);
            if let Some(e) = &f.location.element {
                let _ = write!(o, " {e}");
            }
            if let Some(i) = f.location.index {
                let _ = write!(o, " {i}");
            }
            let _ = write!(o, ": {}", f.message);
            if !f.evidence.is_empty() {
                let ev: Vec<String> = f
                    .evidence
                    .iter()
                    .map(|(k, v)| format!("{k}={}", fmt_num(*v)))
                    .collect();
                let _ = write!(o, " [{}]", ev.join(", "));
            }
            o.push('\n');
        }
        let _ = writeln!(o, "{}", self.summary());
        o
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Six significant digits, trailing zeros trimmed.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = (5 - v.abs().log10().floor() as i32).clamp(0, 12) as usize;
    let s = format!("{v:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Structural validation followed by every rule check. A structurally
/// invalid board yields only the structural findings.
pub fn run_drc(board: &BoardDesign, cfg: &DrcConfig) -> DrcReport {
    let structural = validate_design(board);
    if !structural.is_empty() {
        return DrcReport::new(
            structural
                .into_iter()
                .map(|e| {
                    let mut f = Finding::new(
                        &format!("structure.{}", e.code.as_str()),
                        Severity::Error,
                        e.message,
                    );
                    if let Some((_, id)) = &e.element {
                        f = f.element(id);
                    }
                    if let Some(i) = e.index {
                        f = f.at(i);
                    }
                    f
                })
                .collect(),
        );
    }
    let currents: BTreeMap<String, f64> = board
        .traces
        .iter()
        .filter_map(|t| t.current.map(|c| (t.id.clone(), c)))
        .collect();
    let mut findings = check_geometry(board, cfg);
    findings.extend(check_flex(board, cfg));
    findings.extend(check_current(board, &currents, cfg));
    findings.extend(check_bends(board, cfg));
    for t in &board.traces {
        let Ok(r) = resistance_breakdown(t, board, cfg) else {
            continue;
        };
        let mut f = Finding::new(
            "electrical.resistance",
            Severity::Info,
            format!(
                "estimated {} Ω unplated, {} Ω plated over {} mm",
                fmt_num(r.unplated),
                fmt_num(r.plated),
                fmt_num(r.length)
            ),
        )
        .element(&t.id)
        .at(t.path[0])
        .with("length_mm", r.length)
        .with("unplated_ohm", r.unplated)
        .with("plated_ohm", r.plated)
        .with("bend_crossings", r.crossings.len() as f64);
        if r.crossings.is_empty() {
            f.evidence.remove("bend_crossings");
        }
        findings.push(f);
        for c in &r.crossings {
            if c.angle.abs() > cfg.bend_penalty.max_angle(t.plated) + THRESHOLD_EPS {
                findings.push(
                    Finding::new(
                        "electrical.bend-extrapolated",
                        Severity::Info,
                        format!(
                            "bend `{}` of {}° exceeds the measured range; penalty held at its {}° value",
                            c.bend,
                            fmt_num(c.angle),
                            fmt_num(cfg.bend_penalty.max_angle(t.plated))
                        ),
                    )
                    .element(&t.id)
                    .related(&c.bend)
                    .with("angle_deg", c.angle),
                );
            }
        }
    }
    DrcReport::new(findings)
}
