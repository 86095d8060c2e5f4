//! The logical board: traces, vias, sockets, bends and flex zones placed on
//! the pitch grid, plus structural validation and net extraction.

mod footprint;
mod nets;
mod validate;

use crate::geometry::{
    BendLine, FlexZone, GeometryError, GridFrame, GridIndex, PlanarOutline, Point2, Stackup,
    DEFAULT_PITCH,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use footprint::{conductor_shapes, disc_polygon, trace_shapes, ConductorShape, Shape};
pub use nets::{derive_nets, lattice_points, net_index, trace_length, Net};
pub use validate::{validate_design, StructuralCode, StructuralError};

pub const DEFAULT_TRACE_WIDTH: f64 = 1.0;
pub const DEFAULT_TRACE_HEIGHT: f64 = 0.3;
pub const DEFAULT_MARGIN: f64 = 1.0;
pub const DEFAULT_VIA_RADIUS: f64 = 0.6;
/// Open coaxial bore left in every via barrel so electrolyte reaches it.
pub const VIA_BORE_RADIUS: f64 = 0.15;
pub const DEFAULT_SOCKET_RADIUS: f64 = 1.0;
pub const DEFAULT_SOCKET_DEPTH: f64 = 2.5;
/// Conductive sleeve thickness around a socket bore.
pub const SOCKET_WALL: f64 = 0.4;

#[derive(
    Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    #[default]
    Top,
    Bottom,
}

impl Layer {
    pub const ALL: [Layer; 2] = [Layer::Top, Layer::Bottom];

    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Top => "top",
            Layer::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(Layer::Top),
            "bottom" => Ok(Layer::Bottom),
            _ => Err(format!("unknown layer `{s}` (expected top or bottom)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Trace,
    Via,
    Socket,
    Bend,
    Flex,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Trace => "trace",
            ElementKind::Via => "via",
            ElementKind::Socket => "socket",
            ElementKind::Bend => "bend",
            ElementKind::Flex => "flex",
        }
    }

    /// Parses the plural collection names used by the HTTP API as well.
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "trace" | "traces" => ElementKind::Trace,
            "via" | "vias" => ElementKind::Via,
            "socket" | "sockets" => ElementKind::Socket,
            "bend" | "bends" => ElementKind::Bend,
            "flex" | "flex_zones" | "flexes" => ElementKind::Flex,
            _ => return None,
        })
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flat board outline as authored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Outline {
    Rect { width: f64, height: f64 },
    Polygon { vertices: Vec<Point2> },
}

impl Outline {
    pub fn planar(&self) -> Result<PlanarOutline, GeometryError> {
        match self {
            Outline::Rect { width, height } => PlanarOutline::rect(*width, *height),
            Outline::Polygon { vertices } => PlanarOutline::new(vertices.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    pub id: String,
    #[serde(default)]
    pub layer: Layer,
    pub path: Vec<GridIndex>,
    #[serde(default = "default_trace_width")]
    pub width: f64,
    #[serde(default = "default_trace_height")]
    pub height: f64,
    /// Whether the trace is electroplated after forming.
    #[serde(default = "default_true")]
    pub plated: bool,
    /// Assigned steady current, A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<f64>,
}

impl Trace {
    pub fn new(id: impl Into<String>, layer: Layer, path: Vec<GridIndex>) -> Self {
        Self {
            id: id.into(),
            layer,
            path,
            width: DEFAULT_TRACE_WIDTH,
            height: DEFAULT_TRACE_HEIGHT,
            plated: true,
            current: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Via {
    pub id: String,
    pub at: GridIndex,
    #[serde(default = "default_via_radius")]
    pub radius: f64,
}

impl Via {
    pub fn new(id: impl Into<String>, at: GridIndex) -> Self {
        Self {
            id: id.into(),
            at,
            radius: DEFAULT_VIA_RADIUS,
        }
    }
}

/// Press-fit receptacle for a header pin: a conductive sleeve around an open bore.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Socket {
    pub id: String,
    pub at: GridIndex,
    #[serde(default = "default_socket_radius")]
    pub radius: f64,
    #[serde(default = "default_socket_depth")]
    pub depth: f64,
    #[serde(default)]
    pub layer: Layer,
}

impl Socket {
    pub fn new(id: impl Into<String>, at: GridIndex, layer: Layer) -> Self {
        Self {
            id: id.into(),
            at,
            radius: DEFAULT_SOCKET_RADIUS,
            depth: DEFAULT_SOCKET_DEPTH,
            layer,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        self.radius + SOCKET_WALL
    }

    /// Vertical extent `(z_lo, z_hi)` of the sleeve. The sleeve starts at the
    /// inner face of its conductor layer and rises past the surface as a boss
    /// when deeper than that layer.
    pub fn z_range(&self, stackup: &Stackup) -> (f64, f64) {
        let d = stackup.depth();
        match self.layer {
            Layer::Top => {
                let hi = d.max(d - stackup.top() + self.depth);
                (hi - self.depth, hi)
            }
            Layer::Bottom => {
                let lo = 0.0f64.min(stackup.bottom() - self.depth);
                (lo, lo + self.depth)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardDesign {
    #[serde(default = "default_name")]
    pub name: String,
    pub outline: Outline,
    pub stackup: Stackup,
    #[serde(default = "default_pitch")]
    pub pitch: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub traces: Vec<Trace>,
    #[serde(default)]
    pub vias: Vec<Via>,
    #[serde(default)]
    pub sockets: Vec<Socket>,
    #[serde(default)]
    pub bends: Vec<BendLine>,
    #[serde(default)]
    pub flex_zones: Vec<FlexZone>,
}

impl BoardDesign {
    pub fn new(name: impl Into<String>, outline: Outline, stackup: Stackup) -> Self {
        Self {
            name: name.into(),
            outline,
            stackup,
            pitch: DEFAULT_PITCH,
            margin: DEFAULT_MARGIN,
            traces: Vec::new(),
            vias: Vec::new(),
            sockets: Vec::new(),
            bends: Vec::new(),
            flex_zones: Vec::new(),
        }
    }

    pub fn planar_outline(&self) -> Result<PlanarOutline, GeometryError> {
        self.outline.planar()
    }

    pub fn frame(&self) -> Result<GridFrame, GeometryError> {
        Ok(GridFrame::for_outline(
            &self.planar_outline()?,
            self.pitch,
            self.margin,
        ))
    }

    pub fn depth(&self) -> f64 {
        self.stackup.depth()
    }

    /// Sorts every element list by id, the canonical order.
    pub fn canonicalize(&mut self) {
        self.traces.sort_by(|a, b| a.id.cmp(&b.id));
        self.vias.sort_by(|a, b| a.id.cmp(&b.id));
        self.sockets.sort_by(|a, b| a.id.cmp(&b.id));
        self.bends.sort_by(|a, b| a.id.cmp(&b.id));
        self.flex_zones.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn trace(&self, id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id == id)
    }

    /// Every element id with its kind, in declaration order.
    pub fn element_ids(&self) -> Vec<(ElementKind, &str)> {
        let mut out = Vec::new();
        out.extend(
            self.traces
                .iter()
                .map(|t| (ElementKind::Trace, t.id.as_str())),
        );
        out.extend(self.vias.iter().map(|v| (ElementKind::Via, v.id.as_str())));
        out.extend(
            self.sockets
                .iter()
                .map(|s| (ElementKind::Socket, s.id.as_str())),
        );
        out.extend(
            self.bends
                .iter()
                .map(|b| (ElementKind::Bend, b.id.as_str())),
        );
        out.extend(
            self.flex_zones
                .iter()
                .map(|f| (ElementKind::Flex, f.id.as_str())),
        );
        out
    }

    /// Removes the element with this id from the list of `kind`; true if found.
    pub fn remove(&mut self, kind: ElementKind, id: &str) -> bool {
        fn take<T>(v: &mut Vec<T>, f: impl Fn(&T) -> bool) -> bool {
            let n = v.len();
            v.retain(|x| !f(x));
            v.len() != n
        }
        match kind {
            ElementKind::Trace => take(&mut self.traces, |t| t.id == id),
            ElementKind::Via => take(&mut self.vias, |t| t.id == id),
            ElementKind::Socket => take(&mut self.sockets, |t| t.id == id),
            ElementKind::Bend => take(&mut self.bends, |t| t.id == id),
            ElementKind::Flex => take(&mut self.flex_zones, |t| t.id == id),
        }
    }
}

fn default_name() -> String {
    "board".into()
}
fn default_pitch() -> f64 {
    DEFAULT_PITCH
}
fn default_margin() -> f64 {
    DEFAULT_MARGIN
}
fn default_trace_width() -> f64 {
    DEFAULT_TRACE_WIDTH
}
fn default_trace_height() -> f64 {
    DEFAULT_TRACE_HEIGHT
}
fn default_true() -> bool {
    true
}
fn default_via_radius() -> f64 {
    DEFAULT_VIA_RADIUS
}
fn default_socket_radius() -> f64 {
    DEFAULT_SOCKET_RADIUS
}
fn default_socket_depth() -> f64 {
    DEFAULT_SOCKET_DEPTH
}

/// Valid element identifier: `[A-Za-z_][A-Za-z0-9_-]*`.
pub fn is_valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}
