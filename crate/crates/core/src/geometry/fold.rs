//! Cylindrical bend model used for the folded preview.
//!
//! Each bend line is a crease on the flat board. Material to the left of the
//! axis direction moves; the strip of width `radius * |angle|` centred on the
//! axis wraps onto a cylinder whose reference surface keeps its length, and
//! everything beyond the strip rotates rigidly. Positive angles fold towards +z.

use super::{GeometryError, Mesh, Point2, Point3, LENGTH_EPS};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_BEND_RADIUS: f64 = 3.0;

fn default_bend_radius() -> f64 {
    DEFAULT_BEND_RADIUS
}

/// A full-width fold of the flat board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendLine {
    pub id: String,
    pub from: Point2,
    pub to: Point2,
    /// Degrees, signed, within [-180, 180].
    pub angle: f64,
    #[serde(default = "default_bend_radius")]
    pub radius: f64,
    #[serde(default)]
    pub sequence: i64,
}

/// Region of a finished device expected to flex in service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexZone {
    pub id: String,
    pub center: Point2,
    pub radius: f64,
    /// Expected deviation from flat, degrees.
    pub expected_deflection: f64,
    /// In-plane direction (degrees from +x) along which the zone is strained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<f64>,
}

#[derive(Debug, Clone)]
struct Hinge {
    ids: Vec<String>,
    origin: Point2,
    dir: Point2,
    normal: Point2,
    ends: [Point2; 2],
    /// Radians, signed.
    angle: f64,
    radius: f64,
    /// Half the arc length of the bend strip.
    half: f64,
}

impl Hinge {
    fn local(&self, p: Point2) -> (f64, f64) {
        let rel = p - self.origin;
        (rel.dot(self.normal), rel.dot(self.dir))
    }

    fn place(&self, s: f64, t: f64, z: f64) -> Point3 {
        let xy = self.origin + self.dir * t + self.normal * s;
        Point3::new(xy.x, xy.y, z)
    }

    /// Position of a point `along` past the strip start at height `z` above the
    /// reference surface, with the strip wrapped to `phi` radians.
    fn wrap(&self, along: f64, z: f64, rigid: bool) -> (f64, f64) {
        let sign = if self.angle < 0.0 { -1.0 } else { 1.0 };
        let theta = self.angle.abs();
        let r = self.radius;
        let zl = z * sign;
        let rr = r - zl;
        let arc = 2.0 * self.half;
        let (s_new, z_new) = if !rigid && along < arc {
            let phi = along / r;
            (-self.half + rr * phi.sin(), r - rr * phi.cos())
        } else {
            let beyond = along - arc;
            (
                -self.half + rr * theta.sin() + beyond * theta.cos(),
                r - rr * theta.cos() + beyond * theta.sin(),
            )
        };
        (s_new, z_new * sign)
    }

    fn apply(&self, p: Point3) -> Point3 {
        let (s, t) = self.local(p.xy());
        let along = s + self.half;
        if along <= 0.0 {
            return p;
        }
        let (s_new, z_new) = self.wrap(along, p.z, false);
        self.place(s_new, t, z_new)
    }

    fn apply_rigid(&self, p: Point3) -> Point3 {
        let (s, t) = self.local(p.xy());
        let (s_new, z_new) = self.wrap(s + self.half, p.z, true);
        self.place(s_new, t, z_new)
    }

    fn moves(&self, p: Point2) -> bool {
        self.local(p).0 + self.half > 0.0
    }

    fn in_strip(&self, p: Point2) -> bool {
        let along = self.local(p).0 + self.half;
        along > 0.0 && along < 2.0 * self.half
    }
}

/// The composed fold of a set of bend lines, evaluated per point.
#[derive(Debug, Clone)]
pub struct FoldMap {
    /// Ordered from the fixed root outwards.
    hinges: Vec<Hinge>,
}

impl FoldMap {
    pub fn new(bends: &[BendLine]) -> Result<Self, GeometryError> {
        let mut ordered: Vec<&BendLine> = bends.iter().collect();
        ordered.sort_by(|a, b| a.sequence.cmp(&b.sequence).then_with(|| a.id.cmp(&b.id)));

        let mut hinges: Vec<Hinge> = Vec::new();
        for b in ordered {
            let dir = (b.to - b.from).normalized().ok_or_else(|| {
                GeometryError::Bend(format!("bend '{}' has a zero-length axis", b.id))
            })?;
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(GeometryError::Bend(format!(
                    "bend '{}' radius must be positive, got {}",
                    b.id, b.radius
                )));
            }
            if !b.angle.is_finite() || !b.from.is_finite() || !b.to.is_finite() {
                return Err(GeometryError::Bend(format!(
                    "bend '{}' is not finite",
                    b.id
                )));
            }
            let angle = b.angle.to_radians();
            // Repeated bends along one crease accumulate.
            if let Some(h) = hinges.iter_mut().find(|h| {
                h.dir.cross(dir).abs() < 1e-9 && (b.from - h.origin).cross(h.dir).abs() < 1e-9
            }) {
                if h.dir.dot(dir) < 0.0 {
                    return Err(GeometryError::Bend(format!(
                        "bend '{}' reuses the crease of '{}' with the opposite orientation",
                        b.id, h.ids[0]
                    )));
                }
                if (h.radius - b.radius).abs() > LENGTH_EPS {
                    return Err(GeometryError::Bend(format!(
                        "bend '{}' reuses the crease of '{}' with a different radius",
                        b.id, h.ids[0]
                    )));
                }
                h.angle += angle;
                h.half = h.radius * h.angle.abs() / 2.0;
                h.ids.push(b.id.clone());
                continue;
            }
            hinges.push(Hinge {
                ids: vec![b.id.clone()],
                origin: b.from,
                dir,
                normal: dir.perp(),
                ends: [b.from, b.to],
                angle,
                radius: b.radius,
                half: b.radius * angle.abs() / 2.0,
            });
        }
        hinges.retain(|h| h.angle.abs() > 1e-12);

        // Depth = number of hinges whose moving side holds this hinge.
        let n = hinges.len();
        let mut depth = vec![0usize; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&hinges[i], &hinges[j]);
                let reach = a.half + b.half;
                let side = |h: &Hinge, other: &Hinge| -> i8 {
                    let s: Vec<f64> = other.ends.iter().map(|&p| h.local(p).0).collect();
                    if s.iter().all(|&v| v >= reach - LENGTH_EPS) {
                        1
                    } else if s.iter().all(|&v| v <= -reach + LENGTH_EPS) {
                        -1
                    } else {
                        0
                    }
                };
                match (side(a, b), side(b, a)) {
                    (1, -1) => depth[j] += 1,
                    (-1, 1) => depth[i] += 1,
                    (-1, -1) => {}
                    _ => {
                        return Err(GeometryError::Bend(format!(
                            "bend axes '{}' and '{}' intersect or their bend strips overlap",
                            a.ids[0], b.ids[0]
                        )))
                    }
                }
            }
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&i| depth[i]);
        let hinges = idx.into_iter().map(|i| hinges[i].clone()).collect();
        Ok(Self { hinges })
    }

    pub fn is_identity(&self) -> bool {
        self.hinges.is_empty()
    }

    /// Maps a flat point (z measured from the reference surface) to its folded position.
    pub fn map_point(&self, p: Point3) -> Point3 {
        let chain: Vec<&Hinge> = self.hinges.iter().filter(|h| h.moves(p.xy())).collect();
        let Some((last, outer)) = chain.split_last() else {
            return p;
        };
        let mut q = last.apply(p);
        for h in outer.iter().rev() {
            q = h.apply_rigid(q);
        }
        q
    }

    fn folds_onto_itself(&self, p: Point3) -> bool {
        let chain = self.hinges.iter().filter(|h| h.moves(p.xy()));
        let total: f64 = chain.clone().map(|h| h.angle.abs()).sum();
        if total > PI + 1e-9 {
            return true;
        }
        // Inner fibres pass through the cylinder axis.
        chain
            .filter(|h| h.in_strip(p.xy()))
            .any(|h| h.radius - p.z * h.angle.signum() <= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub mesh: Mesh,
    /// Set when some part of the board folds back through another.
    pub self_intersection: bool,
}

/// Folds a flat solid whose reference surface is `z = 0`.
pub fn fold_preview(flat_solid: &Mesh, bends: &[BendLine]) -> Result<FoldResult, GeometryError> {
    fold_preview_about(flat_solid, bends, 0.0)
}

/// Folds a flat solid about the reference surface `z = neutral_z`.
pub fn fold_preview_about(
    flat_solid: &Mesh,
    bends: &[BendLine],
    neutral_z: f64,
) -> Result<FoldResult, GeometryError> {
    let map = FoldMap::new(bends)?;
    let mut self_intersection = false;
    let vertices = flat_solid
        .vertices
        .iter()
        .map(|&p| {
            let local = Point3::new(p.x, p.y, p.z - neutral_z);
            self_intersection |= map.folds_onto_itself(local);
            let q = map.map_point(local);
            Point3::new(q.x, q.y, q.z + neutral_z)
        })
        .collect();
    Ok(FoldResult {
        mesh: Mesh {
            vertices,
            triangles: flat_solid.triangles.clone(),
        },
        self_intersection,
    })
}
