use super::{Bounds, GeometryError, Point2, LENGTH_EPS};

/// Closed simple polygon describing the flat, as-printed board.
///
/// Construction normalises the winding to counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarOutline {
    vertices: Vec<Point2>,
}

impl PlanarOutline {
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Outline(format!(
                "needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::Outline(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= LENGTH_EPS {
                return Err(GeometryError::Outline(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        let area = signed_area(&vertices);
        if !(area.abs() > LENGTH_EPS) {
            return Err(GeometryError::Outline("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if let Some((i, j)) = first_self_intersection(&vertices) {
            return Err(GeometryError::Outline(format!(
                "edges {i} and {j} intersect"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn rect(width: f64, height: f64) -> Result<Self, GeometryError> {
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(GeometryError::Outline(format!(
                "rectangle {width} x {height} must have positive finite sides"
            )));
        }
        Self::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(width, 0.0),
            Point2::new(width, height),
            Point2::new(0.0, height),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::of(self.vertices.iter().copied()).expect("outline has vertices")
    }

    /// Inside test; points within `LENGTH_EPS` of the boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        if self.distance_to_boundary(p) <= LENGTH_EPS {
            return true;
        }
        self.strictly_contains(p)
    }

    /// Even-odd crossing test without boundary tolerance.
    pub fn strictly_contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parameters `t` along `a + t (b - a)` where the infinite line crosses the boundary.
    pub fn line_crossings(&self, a: Point2, b: Point2) -> Vec<f64> {
        let d = b - a;
        let mut ts = Vec::new();
        for (p, q) in self.edges() {
            let e = q - p;
            let denom = d.cross(e);
            if denom.abs() < 1e-15 {
                // Parallel: collinear edges contribute their endpoints.
                if (p - a).cross(d).abs() <= LENGTH_EPS * d.norm() {
                    let dd = d.dot(d);
                    ts.push((p - a).dot(d) / dd);
                    ts.push((q - a).dot(d) / dd);
                }
                continue;
            }
            let t = (p - a).cross(e) / denom;
            let u = (p - a).cross(d) / denom;
            if (-1e-12..=1.0 + 1e-12).contains(&u) {
                ts.push(t);
            }
        }
        ts
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn first_self_intersection(v: &[Point2]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges may only share their common vertex; reject folding back.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let u = p - shared;
                let w = q - shared;
                if u.cross(w).abs() <= 1e-12 * u.norm() * w.norm() && u.dot(w) > 0.0 {
                    return Some((i, j));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - LENGTH_EPS
        && p.x <= a.x.max(b.x) + LENGTH_EPS
        && p.y >= a.y.min(b.y) - LENGTH_EPS
        && p.y <= a.y.max(b.y) + LENGTH_EPS
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Minimum distance between two closed segments.
pub fn segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalises_clockwise_input() {
        let o = PlanarOutline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(o.area() > 0.0);
    }

    #[test]
    fn rejects_bow_tie() {
        let err = PlanarOutline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]);
        assert!(matches!(err, Err(GeometryError::Outline(_))));
    }

    #[test]
    fn rejects_degenerate() {
        assert!(PlanarOutline::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
        assert!(PlanarOutline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0)
        ])
        .is_err());
        assert!(PlanarOutline::rect(0.0, 1.0).is_err());
    }

    #[test]
    fn boundary_counts_as_inside() {
        let o = PlanarOutline::rect(10.0, 5.0).unwrap();
        assert!(o.contains(Point2::new(10.0, 2.0)));
        assert!(o.contains(Point2::new(0.0, 0.0)));
        assert!(!o.contains(Point2::new(10.1, 2.0)));
        assert!((o.distance_to_boundary(Point2::new(5.0, 2.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn concave_containment() {
        // U shape: notch between x 4..6 above y 2.
        let o = PlanarOutline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 10.0),
            Point2::new(6.0, 10.0),
            Point2::new(6.0, 2.0),
            Point2::new(4.0, 2.0),
            Point2::new(4.0, 10.0),
            Point2::new(0.0, 10.0),
        ])
        .unwrap();
        assert!(!o.contains(Point2::new(5.0, 5.0)));
        assert!(o.contains(Point2::new(2.0, 5.0)));
        assert!((o.area() - 84.0).abs() < 1e-12);
    }
}
