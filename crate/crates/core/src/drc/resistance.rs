use super::{DrcConfig, DrcError};
use crate::geometry::Point2;
use crate::layout::{trace_length, BoardDesign, Trace};
use serde::{Deserialize, Serialize};

/// A place where a trace passes from one side of a bend axis to the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendCrossing {
    pub bend: String,
    /// Signed bend angle, degrees.
    pub angle: f64,
    /// Path segment on which the crossing completes.
    pub segment: usize,
    /// Angle between the crossing segment and the axis normal, degrees
    /// (0 when the trace crosses square to the crease).
    pub incidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceEstimate {
    pub length: f64,
    pub unplated: f64,
    pub plated: f64,
    pub crossings: Vec<BendCrossing>,
}

/// Every bend-axis crossing along the trace centreline, per bend in
/// declaration order. Touching the axis without changing side is not a crossing.
pub fn bend_crossings(trace: &Trace, board: &BoardDesign) -> Result<Vec<BendCrossing>, DrcError> {
    let frame = board.frame().map_err(|e| DrcError::Domain(e.to_string()))?;
    let pts: Vec<Point2> = trace.path.iter().map(|&i| frame.position(i)).collect();
    let mut out = Vec::new();
    for b in &board.bends {
        let dir = b.to - b.from;
        let Some(unit) = dir.normalized() else {
            continue;
        };
        let side = |p: Point2| {
            let c = unit.cross(p - b.from);
            if c.abs() <= 1e-9 {
                0
            } else {
                c.signum() as i32
            }
        };
        let mut last = 0;
        for (k, p) in pts.iter().enumerate() {
            let s = side(*p);
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                let seg = k - 1;
                let d = (pts[k] - pts[k - 1]).normalized().unwrap_or(unit.perp());
                let incidence = d.dot(unit).abs().clamp(0.0, 1.0).asin().to_degrees();
                out.push(BendCrossing {
                    bend: b.id.clone(),
                    angle: b.angle,
                    segment: seg,
                    incidence,
                });
            }
            last = s;
        }
    }
    Ok(out)
}

fn check_section(trace: &Trace) -> Result<f64, DrcError> {
    let area = trace.width * trace.height;
    if !(area > 0.0 && area.is_finite()) {
        return Err(DrcError::Domain(format!(
            "trace `{}` has zero cross-section ({} x {} mm)",
            trace.id, trace.width, trace.height
        )));
    }
    Ok(area)
}

/// Ohms from length / (σ · w · h), compounded by the bend penalty of every
/// axis crossing. Lengths are in mm, so the mm⁻¹ → m⁻¹ factor is 1e3.
pub fn estimate_trace_resistance(
    trace: &Trace,
    board: &BoardDesign,
    plated: bool,
    cfg: &DrcConfig,
) -> Result<f64, DrcError> {
    let area = check_section(trace)?;
    let sigma = if plated {
        cfg.material.conductivity_plated
    } else {
        cfg.material.conductivity_unplated
    };
    let flat = trace_length(trace, board) / (sigma * area) * 1e3;
    let penalty: f64 = bend_crossings(trace, board)?
        .iter()
        .map(|c| cfg.bend_penalty.multiplier(c.angle, plated))
        .product();
    Ok(flat * penalty)
}

pub fn resistance_breakdown(
    trace: &Trace,
    board: &BoardDesign,
    cfg: &DrcConfig,
) -> Result<ResistanceEstimate, DrcError> {
    Ok(ResistanceEstimate {
        length: trace_length(trace, board),
        unplated: estimate_trace_resistance(trace, board, false, cfg)?,
        plated: estimate_trace_resistance(trace, board, true, cfg)?,
        crossings: bend_crossings(trace, board)?,
    })
}
