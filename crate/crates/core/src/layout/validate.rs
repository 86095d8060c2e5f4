use super::{is_valid_id, BoardDesign, ElementKind, Layer, VIA_BORE_RADIUS};
use crate::geometry::{
    lattice_extent, segment_distance, FoldMap, GeometryError, GridFrame, GridIndex, PlanarOutline,
    Point2, LENGTH_EPS,
};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralCode {
    InvalidName,
    InvalidOutline,
    InvalidPitch,
    InvalidMargin,
    InvalidStackup,
    EmptyGrid,
    GridTooLarge,
    InvalidId,
    DuplicateId,
    OffGrid,
    OffBoard,
    InvalidPath,
    InvalidDimension,
    DuplicateVia,
    DuplicateSocket,
    SocketOnVia,
    InvalidBend,
    InvalidFlexZone,
}

impl StructuralCode {
    pub fn as_str(self) -> &'static str {
        match self {
            StructuralCode::InvalidName => "invalid-name",
            StructuralCode::InvalidOutline => "invalid-outline",
            StructuralCode::InvalidPitch => "invalid-pitch",
            StructuralCode::InvalidMargin => "invalid-margin",
            StructuralCode::InvalidStackup => "invalid-stackup",
            StructuralCode::EmptyGrid => "empty-grid",
            StructuralCode::GridTooLarge => "grid-too-large",
            StructuralCode::InvalidId => "invalid-id",
            StructuralCode::DuplicateId => "duplicate-id",
            StructuralCode::OffGrid => "off-grid",
            StructuralCode::OffBoard => "off-board",
            StructuralCode::InvalidPath => "invalid-path",
            StructuralCode::InvalidDimension => "invalid-dimension",
            StructuralCode::DuplicateVia => "duplicate-via",
            StructuralCode::DuplicateSocket => "duplicate-socket",
            StructuralCode::SocketOnVia => "socket-on-via",
            StructuralCode::InvalidBend => "invalid-bend",
            StructuralCode::InvalidFlexZone => "invalid-flex-zone",
        }
    }
}

/// One violated board invariant, addressed by element and field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralError {
    pub code: StructuralCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<(ElementKind, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Offending grid index, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<GridIndex>,
    /// Position within a list field (path point, polygon vertex).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    pub message: String,
}

impl StructuralError {
    fn board(code: StructuralCode, field: &str, message: String) -> Self {
        Self {
            code,
            element: None,
            field: Some(field.into()),
            index: None,
            position: None,
            message,
        }
    }

    fn element(
        code: StructuralCode,
        kind: ElementKind,
        id: &str,
        field: &str,
        message: String,
    ) -> Self {
        Self {
            code,
            element: Some((kind, id.to_string())),
            field: Some(field.into()),
            index: None,
            position: None,
            message,
        }
    }

    fn at(mut self, index: GridIndex) -> Self {
        self.index = Some(index);
        self
    }

    fn pos(mut self, position: usize) -> Self {
        self.position = Some(position);
        self
    }
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.code.as_str())?;
        if let Some((kind, id)) = &self.element {
            write!(f, "{kind} `{id}`: ")?;
        }
        f.write_str(&self.message)
    }
}

struct Grid<'a> {
    outline: &'a PlanarOutline,
    frame: GridFrame,
}

impl Grid<'_> {
    fn contains(&self, idx: GridIndex) -> bool {
        self.frame.contains(self.outline, idx)
    }

    /// Distance from a point to the board edge.
    fn edge_distance(&self, p: Point2) -> f64 {
        self.outline.distance_to_boundary(p)
    }

    fn segment_edge_distance(&self, a: Point2, b: Point2) -> f64 {
        self.outline
            .edges()
            .map(|(p, q)| segment_distance(a, b, p, q))
            .fold(f64::INFINITY, f64::min)
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

/// Every structural violation in `board`; empty iff the board is sound.
pub fn validate_design(board: &BoardDesign) -> Vec<StructuralError> {
    use StructuralCode as C;
    let mut errs = Vec::new();

    if board.name.is_empty() || board.name.chars().any(char::is_control) {
        errs.push(StructuralError::board(
            C::InvalidName,
            "name",
            "board name must be non-empty and free of control characters".into(),
        ));
    }
    let outline = match board.planar_outline() {
        Ok(o) => Some(o),
        Err(e) => {
            errs.push(StructuralError::board(
                C::InvalidOutline,
                "outline",
                e.to_string(),
            ));
            None
        }
    };
    let pitch_ok = positive(board.pitch);
    if !pitch_ok {
        errs.push(StructuralError::board(
            C::InvalidPitch,
            "pitch",
            format!("pitch must be positive, got {}", board.pitch),
        ));
    }
    let margin_ok = board.margin >= 0.0 && board.margin.is_finite();
    if !margin_ok {
        errs.push(StructuralError::board(
            C::InvalidMargin,
            "margin",
            format!("margin must be non-negative, got {}", board.margin),
        ));
    }
    let stackup_ok = match board.stackup.validate() {
        Ok(()) => true,
        Err(e) => {
            errs.push(StructuralError::board(
                C::InvalidStackup,
                "stackup",
                e.to_string(),
            ));
            false
        }
    };

    let grid = match (&outline, pitch_ok && margin_ok) {
        (Some(o), true) => match lattice_extent(o, board.pitch, board.margin) {
            Ok(_) => Some(Grid {
                outline: o,
                frame: GridFrame::for_outline(o, board.pitch, board.margin),
            }),
            Err(GeometryError::GridTooLarge { count, limit }) => {
                errs.push(StructuralError::board(
                    C::GridTooLarge,
                    "pitch",
                    format!("grid would hold {count} points (limit {limit})"),
                ));
                None
            }
            Err(e) => {
                errs.push(StructuralError::board(C::EmptyGrid, "pitch", e.to_string()));
                None
            }
        },
        _ => None,
    };

    let mut seen: HashSet<&str> = HashSet::new();
    for (kind, id) in board.element_ids() {
        if !is_valid_id(id) {
            errs.push(StructuralError::element(
                C::InvalidId,
                kind,
                id,
                "id",
                format!("`{id}` is not a valid identifier"),
            ));
        } else if !seen.insert(id) {
            errs.push(StructuralError::element(
                C::DuplicateId,
                kind,
                id,
                "id",
                format!("id `{id}` is already used"),
            ));
        }
    }

    let on_grid = |errs: &mut Vec<StructuralError>,
                   kind: ElementKind,
                   id: &str,
                   field: &str,
                   idx: GridIndex,
                   pos: Option<usize>| {
        if let Some(g) = &grid {
            if !g.contains(idx) {
                let mut e = StructuralError::element(
                    C::OffGrid,
                    kind,
                    id,
                    field,
                    format!("grid index {idx} is not a point of the board grid"),
                )
                .at(idx);
                e.position = pos;
                errs.push(e);
                return false;
            }
            return true;
        }
        false
    };

    for t in &board.traces {
        let k = ElementKind::Trace;
        if t.path.len() < 2 {
            errs.push(StructuralError::element(
                C::InvalidPath,
                k,
                &t.id,
                "path",
                format!("path needs at least 2 points, got {}", t.path.len()),
            ));
        }
        for (i, w) in t.path.windows(2).enumerate() {
            if w[0] == w[1] {
                errs.push(
                    StructuralError::element(
                        C::InvalidPath,
                        k,
                        &t.id,
                        "path",
                        format!("point {} repeats {}", i + 1, w[0]),
                    )
                    .at(w[1])
                    .pos(i + 1),
                );
            }
        }
        let mut all_on = true;
        for (i, &p) in t.path.iter().enumerate() {
            all_on &= on_grid(&mut errs, k, &t.id, "path", p, Some(i));
        }
        let width_ok = positive(t.width);
        if !width_ok {
            errs.push(StructuralError::element(
                C::InvalidDimension,
                k,
                &t.id,
                "width",
                format!("width must be positive, got {}", t.width),
            ));
        }
        let layer_h = match t.layer {
            Layer::Top => board.stackup.top(),
            Layer::Bottom => board.stackup.bottom(),
        };
        if !positive(t.height) || (stackup_ok && t.height > layer_h + LENGTH_EPS) {
            errs.push(StructuralError::element(
                C::InvalidDimension,
                k,
                &t.id,
                "height",
                format!(
                    "height {} must be positive and at most the {} layer height {layer_h}",
                    t.height, t.layer
                ),
            ));
        }
        if let Some(c) = t.current {
            if !(c >= 0.0 && c.is_finite()) {
                errs.push(StructuralError::element(
                    C::InvalidDimension,
                    k,
                    &t.id,
                    "current",
                    format!("current must be non-negative, got {c}"),
                ));
            }
        }
        if let (Some(g), true, true) = (&grid, all_on, width_ok) {
            for (i, w) in t.path.windows(2).enumerate() {
                let (a, b) = (g.frame.position(w[0]), g.frame.position(w[1]));
                if g.segment_edge_distance(a, b) < t.width * 0.5 - LENGTH_EPS
                    || !g.outline.contains((a + b) * 0.5)
                {
                    errs.push(
                        StructuralError::element(
                            C::OffBoard,
                            k,
                            &t.id,
                            "path",
                            format!("segment {} to {} does not stay on the board", w[0], w[1]),
                        )
                        .at(w[0])
                        .pos(i),
                    );
                }
            }
        }
    }

    let mut via_at: HashMap<GridIndex, &str> = HashMap::new();
    for v in &board.vias {
        let k = ElementKind::Via;
        let ok = on_grid(&mut errs, k, &v.id, "at", v.at, None);
        if !(v.radius > VIA_BORE_RADIUS && v.radius.is_finite()) {
            errs.push(StructuralError::element(
                C::InvalidDimension,
                k,
                &v.id,
                "radius",
                format!(
                    "radius must exceed the {VIA_BORE_RADIUS} mm bore, got {}",
                    v.radius
                ),
            ));
        } else if let (Some(g), true) = (&grid, ok) {
            if g.edge_distance(g.frame.position(v.at)) < v.radius - LENGTH_EPS {
                errs.push(
                    StructuralError::element(
                        C::OffBoard,
                        k,
                        &v.id,
                        "radius",
                        format!("via of radius {} crosses the board edge", v.radius),
                    )
                    .at(v.at),
                );
            }
        }
        if let Some(first) = via_at.get(&v.at) {
            errs.push(
                StructuralError::element(
                    C::DuplicateVia,
                    k,
                    &v.id,
                    "at",
                    format!("grid point {} already holds via `{first}`", v.at),
                )
                .at(v.at),
            );
        } else {
            via_at.insert(v.at, &v.id);
        }
    }

    let mut socket_at: HashMap<(Layer, GridIndex), &str> = HashMap::new();
    for s in &board.sockets {
        let k = ElementKind::Socket;
        let ok = on_grid(&mut errs, k, &s.id, "at", s.at, None);
        let radius_ok = positive(s.radius);
        if !radius_ok {
            errs.push(StructuralError::element(
                C::InvalidDimension,
                k,
                &s.id,
                "radius",
                format!("radius must be positive, got {}", s.radius),
            ));
        }
        if !positive(s.depth) {
            errs.push(StructuralError::element(
                C::InvalidDimension,
                k,
                &s.id,
                "depth",
                format!("depth must be positive, got {}", s.depth),
            ));
        }
        if let (Some(g), true, true) = (&grid, ok, radius_ok) {
            if g.edge_distance(g.frame.position(s.at)) < s.outer_radius() - LENGTH_EPS {
                errs.push(
                    StructuralError::element(
                        C::OffBoard,
                        k,
                        &s.id,
                        "radius",
                        format!(
                            "socket sleeve of radius {} crosses the board edge",
                            s.outer_radius()
                        ),
                    )
                    .at(s.at),
                );
            }
        }
        if let Some(v) = via_at.get(&s.at) {
            errs.push(
                StructuralError::element(
                    C::SocketOnVia,
                    k,
                    &s.id,
                    "at",
                    format!("grid point {} already holds via `{v}`", s.at),
                )
                .at(s.at),
            );
        }
        if let Some(first) = socket_at.get(&(s.layer, s.at)) {
            errs.push(
                StructuralError::element(
                    C::DuplicateSocket,
                    k,
                    &s.id,
                    "at",
                    format!(
                        "grid point {} on the {} layer already holds socket `{first}`",
                        s.at, s.layer
                    ),
                )
                .at(s.at),
            );
        } else {
            socket_at.insert((s.layer, s.at), &s.id);
        }
    }

    let mut bends_ok = true;
    for b in &board.bends {
        let k = ElementKind::Bend;
        let before = errs.len();
        if !(b.angle.is_finite() && (-180.0..=180.0).contains(&b.angle)) {
            errs.push(StructuralError::element(
                C::InvalidBend,
                k,
                &b.id,
                "angle",
                format!("angle must lie in [-180, 180] degrees, got {}", b.angle),
            ));
        }
        if !positive(b.radius) || (stackup_ok && b.radius < board.depth() - LENGTH_EPS) {
            errs.push(StructuralError::element(
                C::InvalidBend,
                k,
                &b.id,
                "radius",
                format!(
                    "radius {} must be at least the board depth {}",
                    b.radius,
                    board.depth()
                ),
            ));
        }
        if !b.from.is_finite() || !b.to.is_finite() || b.from.distance(b.to) <= LENGTH_EPS {
            errs.push(StructuralError::element(
                C::InvalidBend,
                k,
                &b.id,
                "axis",
                "axis needs two distinct finite endpoints".into(),
            ));
        } else if let Some(o) = &outline {
            for (i, p) in [b.from, b.to].into_iter().enumerate() {
                if o.strictly_contains(p) && o.distance_to_boundary(p) > LENGTH_EPS {
                    errs.push(
                        StructuralError::element(
                            C::InvalidBend,
                            k,
                            &b.id,
                            "axis",
                            format!("axis endpoint ({}, {}) lies inside the outline", p.x, p.y),
                        )
                        .pos(i),
                    );
                }
            }
            let tol = 1e-9 / b.from.distance(b.to);
            let ts = o.line_crossings(b.from, b.to);
            if ts.is_empty() {
                errs.push(StructuralError::element(
                    C::InvalidBend,
                    k,
                    &b.id,
                    "axis",
                    "axis does not cross the board".into(),
                ));
            } else if ts.iter().any(|t| *t < -tol || *t > 1.0 + tol) {
                errs.push(StructuralError::element(
                    C::InvalidBend,
                    k,
                    &b.id,
                    "axis",
                    "axis must span the full width of the board".into(),
                ));
            }
        }
        bends_ok &= errs.len() == before;
    }
    if bends_ok && !board.bends.is_empty() {
        if let Err(e) = FoldMap::new(&board.bends) {
            let first = board
                .bends
                .iter()
                .map(|b| b.id.as_str())
                .min()
                .unwrap_or_default();
            errs.push(StructuralError::element(
                C::InvalidBend,
                ElementKind::Bend,
                first,
                "axis",
                e.to_string(),
            ));
        }
    }

    for f in &board.flex_zones {
        let k = ElementKind::Flex;
        if !f.center.is_finite() {
            errs.push(StructuralError::element(
                C::InvalidFlexZone,
                k,
                &f.id,
                "center",
                "center must be finite".into(),
            ));
        }
        if !positive(f.radius) {
            errs.push(StructuralError::element(
                C::InvalidFlexZone,
                k,
                &f.id,
                "radius",
                format!("radius must be positive, got {}", f.radius),
            ));
        }
        if !(f.expected_deflection >= 0.0 && f.expected_deflection < 180.0) {
            errs.push(StructuralError::element(
                C::InvalidFlexZone,
                k,
                &f.id,
                "deflection",
                format!(
                    "expected deflection must lie in [0, 180), got {}",
                    f.expected_deflection
                ),
            ));
        }
        if let Some(d) = f.direction {
            if !d.is_finite() {
                errs.push(StructuralError::element(
                    C::InvalidFlexZone,
                    k,
                    &f.id,
                    "direction",
                    "direction must be finite".into(),
                ));
            }
        }
    }
    errs
}
