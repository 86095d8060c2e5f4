use super::{BoardDesign, ElementKind, Layer, Trace};
use crate::geometry::{segment_distance, Bounds, GridFrame, GridIndex, Point2, LENGTH_EPS};
use std::f64::consts::PI;

/// Planar conductor footprint: a convex polygon (counter-clockwise) or a disc.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon(Vec<Point2>),
    Disc { center: Point2, radius: f64 },
}

impl Shape {
    pub fn bounds(&self) -> Bounds {
        match self {
            Shape::Polygon(p) => Bounds::of(p.iter().copied()).expect("non-empty polygon"),
            Shape::Disc { center, radius } => Bounds {
                min: Point2::new(center.x - radius, center.y - radius),
                max: Point2::new(center.x + radius, center.y + radius),
            },
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Shape::Polygon(poly) => convex_contains(poly, p, LENGTH_EPS),
            Shape::Disc { center, radius } => p.distance(*center) <= radius + LENGTH_EPS,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Polygon(p) => {
                let n = p.len();
                (0..n).map(|i| p[i].cross(p[(i + 1) % n])).sum::<f64>() * 0.5
            }
            Shape::Disc { radius, .. } => PI * radius * radius,
        }
    }

    /// Edge-to-edge gap; zero when the shapes touch or overlap.
    pub fn clearance(&self, other: &Shape) -> f64 {
        match (self, other) {
            (
                Shape::Disc {
                    center: a,
                    radius: ra,
                },
                Shape::Disc {
                    center: b,
                    radius: rb,
                },
            ) => (a.distance(*b) - ra - rb).max(0.0),
            (Shape::Polygon(p), Shape::Disc { center, radius })
            | (Shape::Disc { center, radius }, Shape::Polygon(p)) => {
                (polygon_point_distance(p, *center) - radius).max(0.0)
            }
            (Shape::Polygon(a), Shape::Polygon(b)) => {
                if convex_overlap(a, b) {
                    return 0.0;
                }
                let mut best = f64::INFINITY;
                for (p, q) in ring(a) {
                    for (r, s) in ring(b) {
                        best = best.min(segment_distance(p, q, r, s));
                    }
                }
                best
            }
        }
    }
}

fn ring(p: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = p.len();
    (0..n).map(move |i| (p[i], p[(i + 1) % n]))
}

fn convex_contains(poly: &[Point2], p: Point2, tol: f64) -> bool {
    ring(poly).all(|(a, b)| {
        let e = b - a;
        e.cross(p - a) >= -tol * e.norm()
    })
}

fn polygon_point_distance(poly: &[Point2], p: Point2) -> f64 {
    if convex_contains(poly, p, 0.0) {
        return 0.0;
    }
    ring(poly)
        .map(|(a, b)| segment_distance(a, b, p, p))
        .fold(f64::INFINITY, f64::min)
}

/// Separating-axis test for two convex polygons (touching counts as overlap).
fn convex_overlap(a: &[Point2], b: &[Point2]) -> bool {
    for poly in [a, b] {
        for (p, q) in ring(poly) {
            let axis = (q - p).perp();
            let proj = |s: &[Point2]| {
                s.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        let d = axis.dot(*v);
                        (lo.min(d), hi.max(d))
                    })
            };
            let (alo, ahi) = proj(a);
            let (blo, bhi) = proj(b);
            if ahi < blo || bhi < alo {
                return false;
            }
        }
    }
    true
}

/// Regular `n`-gon whose area equals the disc's, so faceted solids keep
/// cylinder volumes.
pub fn disc_polygon(center: Point2, radius: f64, n: usize) -> Vec<Point2> {
    let n = n.max(3);
    let step = 2.0 * PI / n as f64;
    let r = radius * (2.0 * PI / (n as f64 * step.sin())).sqrt();
    (0..n)
        .map(|k| {
            let a = k as f64 * step;
            Point2::new(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

/// Segment rectangles without end caps, plus a square at each interior
/// joint aligned with the incoming segment. Only the half of the square past
/// the joint is emitted (the other half lies inside the incoming rectangle),
/// so the pieces share the rectangle's end edge exactly.
pub fn trace_shapes(trace: &Trace, frame: &GridFrame) -> Vec<Shape> {
    trace_pieces(trace, frame)
        .into_iter()
        .map(|(_, s)| s)
        .collect()
}

/// Unit direction of a grid step, computed from the reduced index delta so
/// parallel segments get bit-identical normals.
fn step_direction(a: GridIndex, b: GridIndex) -> Option<Point2> {
    let (du, dv) = (b.u - a.u, b.v - a.v);
    let g = gcd(du.unsigned_abs(), dv.unsigned_abs()).max(1) as i64;
    Point2::new((du / g) as f64, (dv / g) as f64).normalized()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn trace_pieces(trace: &Trace, frame: &GridFrame) -> Vec<(GridIndex, Shape)> {
    let half = trace.width * 0.5;
    let mut out = Vec::new();
    let last = trace.path.len().saturating_sub(1);
    for (k, w) in trace.path.windows(2).enumerate() {
        let (a, b) = (frame.position(w[0]), frame.position(w[1]));
        let Some(d) = step_direction(w[0], w[1]) else {
            continue;
        };
        let n = d.perp() * half;
        out.push((w[0], Shape::Polygon(vec![a - n, b - n, b + n, a + n])));
        if k + 1 < last {
            let dd = d * half;
            out.push((
                w[1],
                Shape::Polygon(vec![b - n, b + dd - n, b + dd + n, b + n]),
            ));
        }
    }
    out
}

/// One footprint piece of a conductive element.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductorShape {
    pub kind: ElementKind,
    pub element: String,
    pub layers: Vec<Layer>,
    pub shape: Shape,
    /// Grid point nearest to this piece, for reporting.
    pub anchor: GridIndex,
}

/// Footprints of all traces, vias (both layers) and socket sleeves.
pub fn conductor_shapes(board: &BoardDesign, frame: &GridFrame) -> Vec<ConductorShape> {
    let mut out = Vec::new();
    for t in &board.traces {
        for (anchor, shape) in trace_pieces(t, frame) {
            out.push(ConductorShape {
                kind: ElementKind::Trace,
                element: t.id.clone(),
                layers: vec![t.layer],
                shape,
                anchor,
            });
        }
    }
    for v in &board.vias {
        out.push(ConductorShape {
            kind: ElementKind::Via,
            element: v.id.clone(),
            layers: Layer::ALL.to_vec(),
            shape: Shape::Disc {
                center: frame.position(v.at),
                radius: v.radius,
            },
            anchor: v.at,
        });
    }
    for s in &board.sockets {
        out.push(ConductorShape {
            kind: ElementKind::Socket,
            element: s.id.clone(),
            layers: vec![s.layer],
            shape: Shape::Disc {
                center: frame.position(s.at),
                radius: s.outer_radius(),
            },
            anchor: s.at,
        });
    }
    out
}
