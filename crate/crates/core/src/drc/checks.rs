use super::resistance::{bend_crossings, estimate_trace_resistance};
use super::{fmt_num, DrcConfig, Finding, Severity, THRESHOLD_EPS};
use crate::geometry::{
    bend_surface_strain, deflection_for_angle, flexural_strain, segment_distance, GridIndex, Point2,
};
use crate::layout::{conductor_shapes, derive_nets, net_index, trace_shapes, BoardDesign, Shape};
use std::collections::{BTreeMap, HashMap};

/// Clearance band in which an 0603 part (1.5 x 0.8 mm) sits comfortably
/// across two traces: at least the fabricable floor, under the part width.
pub const COMPONENT_SPACING: (f64, f64) = (0.5, 0.8);

/// Width floor and distinct-net clearance on each conductor layer.
pub fn check_geometry(board: &BoardDesign, cfg: &DrcConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for t in &board.traces {
        if t.width < cfg.min_trace_width - THRESHOLD_EPS {
            out.push(
                Finding::new(
                    "geometry.width",
                    Severity::Error,
                    format!(
                        "width {} mm is below the {} mm minimum",
                        fmt_num(t.width),
                        fmt_num(cfg.min_trace_width)
                    ),
                )
                .element(&t.id)
                .at(t.path[0])
                .with("width_mm", t.width)
                .with("min_width_mm", cfg.min_trace_width),
            );
        }
    }

    let Ok(frame) = board.frame() else { return out };
    let shapes = conductor_shapes(board, &frame);
    let nets = net_index(&derive_nets(board));
    let reach = cfg.min_spacing.max(COMPONENT_SPACING.1) + THRESHOLD_EPS;
    let bounds: Vec<_> = shapes.iter().map(|s| s.shape.bounds()).collect();
    // Closest approach per unordered element pair.
    let mut pairs: BTreeMap<(&str, &str), (f64, GridIndex)> = BTreeMap::new();
    for i in 0..shapes.len() {
        for j in (i + 1)..shapes.len() {
            let (a, b) = (&shapes[i], &shapes[j]);
            if a.element == b.element || nets.get(&a.element) == nets.get(&b.element) {
                continue;
            }
            if !a.layers.iter().any(|l| b.layers.contains(l)) || bounds[i].gap(&bounds[j]) > reach {
                continue;
            }
            let c = a.shape.clearance(&b.shape);
            let (first, second, anchor) = if a.element <= b.element {
                (a.element.as_str(), b.element.as_str(), a.anchor)
            } else {
                (b.element.as_str(), a.element.as_str(), b.anchor)
            };
            let e = pairs
                .entry((first, second))
                .or_insert((f64::INFINITY, anchor));
            if c < e.0 {
                *e = (c, anchor);
            }
        }
    }
    for ((a, b), (c, anchor)) in pairs {
        if c < cfg.min_spacing - THRESHOLD_EPS {
            out.push(
                Finding::new(
                    "geometry.spacing",
                    Severity::Error,
                    format!(
                        "clearance to `{b}` is {} mm, below the {} mm minimum",
                        fmt_num(c),
                        fmt_num(cfg.min_spacing)
                    ),
                )
                .element(a)
                .related(b)
                .at(anchor)
                .with("clearance_mm", c)
                .with("min_spacing_mm", cfg.min_spacing),
            );
        }
        if c >= COMPONENT_SPACING.0 - THRESHOLD_EPS && c < COMPONENT_SPACING.1 - THRESHOLD_EPS {
            out.push(
                Finding::new(
                    "geometry.0603",
                    Severity::Info,
                    format!(
                        "clearance to `{b}` is {} mm; an 0603 part can bridge this gap",
                        fmt_num(c)
                    ),
                )
                .element(a)
                .related(b)
                .at(anchor)
                .with("clearance_mm", c),
            );
        }
    }
    out
}

/// Smallest angle between two undirected directions, degrees in [0, 90].
fn line_angle(a: Point2, b: Point2) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().clamp(0.0, 1.0);
    c.acos().to_degrees()
}

/// Plating fracture risk in flex zones and trace orientation hints.
pub fn check_flex(board: &BoardDesign, cfg: &DrcConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let Ok(frame) = board.frame() else { return out };
    let depth = board.depth();
    for z in &board.flex_zones {
        let disc = Shape::Disc {
            center: z.center,
            radius: z.radius,
        };
        let span = 2.0 * z.radius;
        let strain = deflection_for_angle(z.expected_deflection, span)
            .and_then(|d| flexural_strain(d, depth, span))
            .unwrap_or(f64::NAN);
        let dir = z.direction.map(|a| {
            let r = a.to_radians();
            Point2::new(r.cos(), r.sin())
        });
        for t in &board.traces {
            let inside = trace_shapes(t, &frame)
                .iter()
                .any(|s| s.clearance(&disc) <= THRESHOLD_EPS);
            if !inside {
                continue;
            }
            if t.plated {
                let severity = if z.expected_deflection >= cfg.fracture_deflection - THRESHOLD_EPS {
                    Some(Severity::Error)
                } else if z.expected_deflection >= 0.8 * cfg.fracture_deflection - THRESHOLD_EPS {
                    Some(Severity::Warning)
                } else {
                    None
                };
                if let Some(sev) = severity {
                    let verb = if sev == Severity::Error {
                        "exceeds"
                    } else {
                        "approaches"
                    };
                    let mut f = Finding::new(
                        "flex.fracture",
                        sev,
                        format!(
                            "expected {}° deflection {verb} the {}° plating fracture threshold for trace `{}`",
                            fmt_num(z.expected_deflection),
                            fmt_num(cfg.fracture_deflection),
                            t.id
                        ),
                    )
                    .element(&z.id)
                    .related(&t.id)
                    .with("deflection_deg", z.expected_deflection)
                    .with("threshold_deg", cfg.fracture_deflection)
                    .with("strain_threshold", cfg.fracture_strain);
                    if strain.is_finite() {
                        f = f.with("equivalent_strain", strain);
                    }
                    out.push(f);
                }
            }
            if let Some(d) = dir {
                let pts: Vec<Point2> = t.path.iter().map(|&i| frame.position(i)).collect();
                let mut best: Option<(f64, GridIndex)> = None;
                for (k, w) in pts.windows(2).enumerate() {
                    if segment_distance(w[0], w[1], z.center, z.center)
                        > z.radius + t.width * 0.5 + THRESHOLD_EPS
                    {
                        continue;
                    }
                    let a = line_angle(w[1] - w[0], d);
                    if best.is_none_or(|(b, _)| a < b) {
                        best = Some((a, t.path[k]));
                    }
                }
                if let Some((a, at)) =
                    best.filter(|(a, _)| *a <= cfg.orientation_tolerance + THRESHOLD_EPS)
                {
                    out.push(
                        Finding::new(
                            "flex.orientation",
                            Severity::Info,
                            format!(
                                "trace `{}` runs within {}° of the flex direction; crossing it more squarely lowers plating strain",
                                t.id,
                                fmt_num(a)
                            ),
                        )
                        .element(&z.id)
                        .related(&t.id)
                        .at(at)
                        .with("angle_deg", a),
                    );
                }
            }
        }
    }
    out
}

/// Current assignments against the measured plated regime and the unplated limit.
pub fn check_current(
    board: &BoardDesign,
    currents: &BTreeMap<String, f64>,
    cfg: &DrcConfig,
) -> Vec<Finding> {
    let mut out = Vec::new();
    for (id, &amps) in currents {
        let Some(t) = board.trace(id) else { continue };
        if !(amps >= 0.0 && amps.is_finite()) {
            continue;
        }
        let ohms = estimate_trace_resistance(t, board, t.plated, cfg).unwrap_or(f64::NAN);
        let (rule, sev, msg) = if t.plated {
            if amps > cfg.current_reference + THRESHOLD_EPS {
                (
                    "current.plated",
                    Severity::Warning,
                    format!(
                        "{} A is above the {} A reference point (30 °C surface); heating is unmeasured here",
                        fmt_num(amps),
                        fmt_num(cfg.current_reference)
                    ),
                )
            } else {
                (
                    "current.plated",
                    Severity::Info,
                    format!(
                        "{} A is within the measured regime ({} A gave a 30 °C surface)",
                        fmt_num(amps),
                        fmt_num(cfg.current_reference)
                    ),
                )
            }
        } else if amps > cfg.unplated_current_limit + THRESHOLD_EPS {
            (
                "current.unplated",
                Severity::Error,
                format!(
                    "{} A through an unplated trace exceeds the {} A limit; plate it or lower the current",
                    fmt_num(amps),
                    fmt_num(cfg.unplated_current_limit)
                ),
            )
        } else {
            (
                "current.unplated",
                Severity::Info,
                format!(
                    "{} A through an unplated trace is within the {} A limit",
                    fmt_num(amps),
                    fmt_num(cfg.unplated_current_limit)
                ),
            )
        };
        let mut f = Finding::new(rule, sev, msg)
            .element(id)
            .at(t.path[0])
            .with("current_a", amps);
        if ohms.is_finite() {
            f = f.with("power_w", amps * amps * ohms);
        }
        out.push(f);
    }
    out
}

/// Hot-air bend feasibility and traces that cross a crease repeatedly or
/// at a slant.
pub fn check_bends(board: &BoardDesign, cfg: &DrcConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    for b in &board.bends {
        let Ok(strain) = bend_surface_strain(board.depth(), b.radius) else {
            continue;
        };
        if strain > cfg.thermoform_strain_limit + THRESHOLD_EPS {
            out.push(
                Finding::new(
                    "bend.strain",
                    Severity::Warning,
                    format!(
                        "outer-fibre strain {} at radius {} mm exceeds the {} forming limit",
                        fmt_num(strain),
                        fmt_num(b.radius),
                        fmt_num(cfg.thermoform_strain_limit)
                    ),
                )
                .element(&b.id)
                .with("strain", strain)
                .with("limit", cfg.thermoform_strain_limit),
            );
        }
    }
    for t in &board.traces {
        let Ok(crossings) = bend_crossings(t, board) else {
            continue;
        };
        let mut per_bend: HashMap<&str, Vec<_>> = HashMap::new();
        for c in &crossings {
            per_bend.entry(c.bend.as_str()).or_default().push(c);
        }
        let mut keys: Vec<_> = per_bend.keys().copied().collect();
        keys.sort_unstable();
        for bend in keys {
            let cs = &per_bend[bend];
            if cs.len() > 1 {
                out.push(
                    Finding::new(
                        "bend.crossing",
                        Severity::Warning,
                        format!("crosses bend `{bend}` {} times; each crossing adds a resistance penalty", cs.len()),
                    )
                    .element(&t.id)
                    .related(bend)
                    .at(t.path[cs[0].segment])
                    .with("crossings", cs.len() as f64),
                );
            }
            if let Some(c) = cs
                .iter()
                .find(|c| c.incidence > cfg.orientation_tolerance + THRESHOLD_EPS)
            {
                out.push(
                    Finding::new(
                        "bend.crossing",
                        Severity::Warning,
                        format!(
                            "crosses bend `{bend}` {}° off square; the bent length is longer than modelled",
                            fmt_num(c.incidence)
                        ),
                    )
                    .element(&t.id)
                    .related(bend)
                    .at(t.path[c.segment])
                    .with("incidence_deg", c.incidence),
                );
            }
        }
    }
    out
}
