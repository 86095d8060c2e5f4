use crate::geometry::{GridIndex, Point2};
use crate::layout::{validate_design, BoardDesign, Outline, StructuralError};
use std::fmt::Write;

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn point(p: Point2) -> String {
    format!("({},{})", num(p.x), num(p.y))
}

fn index(i: GridIndex) -> String {
    format!("({},{})", i.u, i.v)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text: fixed key order, elements sorted by id, two-space indent,
/// LF line ends. Optional fields are written only when they differ from
/// their implicit value.
pub fn serialize(board: &BoardDesign) -> Result<String, Vec<StructuralError>> {
    let errs = validate_design(board);
    if !errs.is_empty() {
        return Err(errs);
    }
    let b = board.clone().canonical();
    let mut o = String::new();
    o.push_str("board {\n");
    let _ = writeln!(o, "  name {}", quote(&b.name));
    match &b.outline {
        Outline::Rect { width, height } => {
            let _ = writeln!(o, "  outline rect {} {}", num(*width), num(*height));
        }
        Outline::Polygon { vertices } => {
            let pts: Vec<String> = vertices.iter().map(|p| point(*p)).collect();
            let _ = writeln!(o, "  outline polygon {}", pts.join(" "));
        }
    }
    let _ = writeln!(o, "  pitch {}", num(b.pitch));
    let _ = writeln!(o, "  margin {}", num(b.margin));
    let h = b.stackup.layer_heights;
    let _ = writeln!(
        o,
        "  stackup {} {} {} {}",
        num(h[0]),
        num(h[1]),
        num(h[2]),
        num(h[3])
    );

    for t in &b.traces {
        let _ = writeln!(o, "  trace {} {{", t.id);
        let _ = writeln!(o, "    layer {}", t.layer);
        let path: Vec<String> = t.path.iter().map(|i| index(*i)).collect();
        let _ = writeln!(o, "    path {}", path.join(" "));
        let _ = writeln!(o, "    width {}", num(t.width));
        let _ = writeln!(o, "    height {}", num(t.height));
        if !t.plated {
            o.push_str("    plated false\n");
        }
        if let Some(c) = t.current {
            let _ = writeln!(o, "    current {}", num(c));
        }
        o.push_str("  }\n");
    }
    for v in &b.vias {
        let _ = writeln!(o, "  via {} {{", v.id);
        let _ = writeln!(o, "    at {}", index(v.at));
        let _ = writeln!(o, "    radius {}", num(v.radius));
        o.push_str("  }\n");
    }
    for s in &b.sockets {
        let _ = writeln!(o, "  socket {} {{", s.id);
        let _ = writeln!(o, "    at {}", index(s.at));
        let _ = writeln!(o, "    radius {}", num(s.radius));
        let _ = writeln!(o, "    depth {}", num(s.depth));
        let _ = writeln!(o, "    layer {}", s.layer);
        o.push_str("  }\n");
    }
    for bl in &b.bends {
        let _ = writeln!(o, "  bend {} {{", bl.id);
        let _ = writeln!(o, "    axis {} {}", point(bl.from), point(bl.to));
        let _ = writeln!(o, "    angle {}", num(bl.angle));
        let _ = writeln!(o, "    radius {}", num(bl.radius));
        let _ = writeln!(o, "    sequence {}", bl.sequence);
        o.push_str("  }\n");
    }
    for f in &b.flex_zones {
        let _ = writeln!(o, "  flex {} {{", f.id);
        let _ = writeln!(o, "    center {}", point(f.center));
        let _ = writeln!(o, "    radius {}", num(f.radius));
        let _ = writeln!(o, "    deflection {}", num(f.expected_deflection));
        if let Some(d) = f.direction {
            let _ = writeln!(o, "    direction {}", num(d));
        }
        o.push_str("  }\n");
    }
    o.push_str("}\n");
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn numbers_round_trip_exactly() {
        for x in [0.1, 2.54, 1.0 / 3.0, 1e-7, 123456.789, -0.25, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(1.0), "1");
    }

    #[test]
    fn canonical_text_is_fixed_point() {
        let text = "board {\n  name \"q\\\"x\"\n  outline rect 60 40\n  pitch 2.54\n  margin 1\n  stackup 0.3 0.3 0.3 0.3\n  trace a {\n    layer bottom\n    path (0,0) (3,0)\n    width 1\n    height 0.3\n    plated false\n    current 0.2\n  }\n}\n";
        let b = parse(text).unwrap();
        assert_eq!(serialize(&b).unwrap(), text);
    }

    #[test]
    fn element_order_does_not_matter() {
        let a = "board { outline rect 30 30; stackup 0.3 0.3 0.3 0.3\n via b { at (1,1) }\n via a { at (2,2) }\n}";
        let b = "board { outline rect 30 30; stackup 0.3 0.3 0.3 0.3\n via a { at (2,2) }\n via b { at (1,1) }\n}";
        let mut x = parse(a).unwrap();
        let y = parse(b).unwrap();
        x.vias.reverse();
        assert_eq!(serialize(&x).unwrap(), serialize(&y).unwrap());
    }

    #[test]
    fn invalid_board_is_refused() {
        let mut b = parse("board { outline rect 30 30; stackup 0.3 0.3 0.3 0.3 }").unwrap();
        b.pitch = -1.0;
        assert!(serialize(&b).is_err());
    }
}
