use super::DrcError;
use serde::{Deserialize, Serialize};

/// Printable conductive filament and its measured conductivities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialProfile {
    pub name: String,
    /// S/m, as printed.
    pub conductivity_unplated: f64,
    /// S/m, after copper electroplating.
    pub conductivity_plated: f64,
    /// Nozzle temperature, °C.
    pub print_temp: f64,
    /// mm/s.
    pub print_speed: f64,
    /// °C.
    pub glass_transition: f64,
}

impl Default for MaterialProfile {
    fn default() -> Self {
        Self {
            name: "copper-filled conductive PLA".into(),
            conductivity_unplated: 7.54e3,
            conductivity_plated: 7.69e5,
            print_temp: 150.0,
            print_speed: 10.0,
            glass_transition: 60.0,
        }
    }
}

impl MaterialProfile {
    pub fn validate(&self) -> Result<(), DrcError> {
        for (k, v) in [
            ("conductivity_unplated", self.conductivity_unplated),
            ("conductivity_plated", self.conductivity_plated),
            ("print_temp", self.print_temp),
            ("print_speed", self.print_speed),
            ("glass_transition", self.glass_transition),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DrcError::Config(format!(
                    "material.{k} must be positive, got {v}"
                )));
            }
        }
        if self.conductivity_plated <= self.conductivity_unplated {
            return Err(DrcError::Config(
                "plated conductivity must exceed unplated conductivity".into(),
            ));
        }
        Ok(())
    }
}

/// Resistance multiplier per bend angle (degrees), linearly interpolated and
/// held constant beyond the last tabulated angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendPenaltyTable {
    pub unplated: Vec<(f64, f64)>,
    pub plated: Vec<(f64, f64)>,
}

impl Default for BendPenaltyTable {
    fn default() -> Self {
        // Measured on 50 mm traces: 10.2 Ω flat, 10.6 / 10.9 / 15.7 Ω after
        // 15° / 45° / 90° bends; plated 0.1 Ω flat and 0.2 Ω bent.
        Self {
            unplated: vec![
                (0.0, 1.0),
                (15.0, 10.6 / 10.2),
                (45.0, 10.9 / 10.2),
                (90.0, 15.7 / 10.2),
            ],
            plated: vec![(0.0, 1.0), (15.0, 2.0), (45.0, 2.0), (90.0, 2.0)],
        }
    }
}

impl BendPenaltyTable {
    pub fn validate(&self) -> Result<(), DrcError> {
        for (name, t) in [("unplated", &self.unplated), ("plated", &self.plated)] {
            if t.first() != Some(&(0.0, 1.0)) {
                return Err(DrcError::Config(format!(
                    "{name} penalty table must start at (0, 1)"
                )));
            }
            for w in t.windows(2) {
                if !(w[1].0 > w[0].0)
                    || !(w[1].1 >= w[0].1)
                    || !w[1].0.is_finite()
                    || !w[1].1.is_finite()
                {
                    return Err(DrcError::Config(format!(
                        "{name} penalty table must have increasing angles and non-decreasing multipliers"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest tabulated angle; larger bends are extrapolated flat.
    pub fn max_angle(&self, plated: bool) -> f64 {
        let t = if plated { &self.plated } else { &self.unplated };
        t.last().map_or(0.0, |p| p.0)
    }

    pub fn multiplier(&self, angle_deg: f64, plated: bool) -> f64 {
        let t = if plated { &self.plated } else { &self.unplated };
        let a = angle_deg.abs();
        let Some(last) = t.last() else { return 1.0 };
        if a >= last.0 {
            return last.1;
        }
        for w in t.windows(2) {
            let ((a0, m0), (a1, m1)) = (w[0], w[1]);
            if a <= a1 {
                return m0 + (m1 - m0) * (a - a0) / (a1 - a0);
            }
        }
        last.1
    }
}

/// Rule thresholds. Every check compares with a 1e-9 tolerance so values
/// exactly at a threshold land on the passing side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrcConfig {
    /// mm.
    pub min_trace_width: f64,
    /// mm, edge to edge between distinct nets.
    pub min_spacing: f64,
    /// Degrees of deviation from flat at which plating cracks.
    pub fracture_deflection: f64,
    pub fracture_strain: f64,
    /// A; the measured plated trace reached 30 °C at this current.
    pub current_reference: f64,
    /// A; unplated traces above this are an error.
    pub unplated_current_limit: f64,
    /// Outer-fibre strain above which a hot-air bend is flagged.
    pub thermoform_strain_limit: f64,
    /// Degrees; traces this close to a flex direction get a reorientation hint.
    pub orientation_tolerance: f64,
    pub material: MaterialProfile,
    pub bend_penalty: BendPenaltyTable,
}

impl Default for DrcConfig {
    fn default() -> Self {
        Self {
            min_trace_width: 0.5,
            min_spacing: 0.5,
            fracture_deflection: 18.46,
            fracture_strain: 0.0110,
            current_reference: 5.0,
            unplated_current_limit: 0.5,
            thermoform_strain_limit: 0.25,
            orientation_tolerance: 15.0,
            material: MaterialProfile::default(),
            bend_penalty: BendPenaltyTable::default(),
        }
    }
}

/// Keys accepted by [`DrcConfig::apply_override`].
pub const OVERRIDE_KEYS: [&str; 13] = [
    "rule.min_trace_width",
    "rule.min_spacing",
    "rule.fracture_deflection",
    "rule.fracture_strain",
    "rule.current_reference",
    "rule.unplated_current_limit",
    "rule.thermoform_strain_limit",
    "rule.orientation_tolerance",
    "material.conductivity_unplated",
    "material.conductivity_plated",
    "material.print_temp",
    "material.print_speed",
    "material.glass_transition",
];

impl DrcConfig {
    pub fn validate(&self) -> Result<(), DrcError> {
        for (k, v) in [
            ("min_trace_width", self.min_trace_width),
            ("min_spacing", self.min_spacing),
            ("fracture_deflection", self.fracture_deflection),
            ("fracture_strain", self.fracture_strain),
            ("current_reference", self.current_reference),
            ("unplated_current_limit", self.unplated_current_limit),
            ("thermoform_strain_limit", self.thermoform_strain_limit),
            ("orientation_tolerance", self.orientation_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DrcError::Config(format!(
                    "rule.{k} must be positive, got {v}"
                )));
            }
        }
        self.material.validate()?;
        self.bend_penalty.validate()
    }

    /// Sets one threshold from text, e.g. `("rule.min_trace_width", "1.5")`.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), DrcError> {
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| DrcError::Config(format!("`{value}` is not a number for {key}")))?;
        let backup = self.clone();
        let slot = match key {
            "rule.min_trace_width" => &mut self.min_trace_width,
            "rule.min_spacing" => &mut self.min_spacing,
            "rule.fracture_deflection" => &mut self.fracture_deflection,
            "rule.fracture_strain" => &mut self.fracture_strain,
            "rule.current_reference" => &mut self.current_reference,
            "rule.unplated_current_limit" => &mut self.unplated_current_limit,
            "rule.thermoform_strain_limit" => &mut self.thermoform_strain_limit,
            "rule.orientation_tolerance" => &mut self.orientation_tolerance,
            "material.conductivity_unplated" => &mut self.material.conductivity_unplated,
            "material.conductivity_plated" => &mut self.material.conductivity_plated,
            "material.print_temp" => &mut self.material.print_temp,
            "material.print_speed" => &mut self.material.print_speed,
            "material.glass_transition" => &mut self.material.glass_transition,
            _ => {
                return Err(DrcError::Config(format!(
                    "unknown setting `{key}` (known: {})",
                    OVERRIDE_KEYS.join(", ")
                )))
            }
        };
        *slot = v;
        if let Err(e) = self.validate() {
            *self = backup;
            return Err(e);
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), DrcError> {
        let (k, v) = parse_override(assignment)?;
        self.apply_override(k, v)
    }
}

/// Splits `key=value`, trimming whitespace around both parts.
pub fn parse_override(s: &str) -> Result<(&str, &str), DrcError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| DrcError::Config(format!("expected key=value, got `{s}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(DrcError::Config(format!("expected key=value, got `{s}`")));
    }
    Ok((k, v))
}
