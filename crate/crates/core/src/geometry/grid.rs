use super::{GeometryError, PlanarOutline, Point2, LENGTH_EPS};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Header/breadboard pitch used when a design does not set one.
pub const DEFAULT_PITCH: f64 = 2.54;

/// Upper bound on the number of lattice sites enumerated by [`generate_point_grid`].
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Integer lattice coordinates on the routing grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridIndex {
    pub u: i64,
    pub v: i64,
}

impl GridIndex {
    pub const fn new(u: i64, v: i64) -> Self {
        Self { u, v }
    }
}

impl fmt::Display for GridIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: GridIndex,
    pub position: Point2,
}

/// The lattice anchor and spacing; membership is decided against an outline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub origin: Point2,
    pub pitch: f64,
    pub margin: f64,
}

impl GridFrame {
    /// Anchors the lattice at the outline's bounding-box minimum plus the margin.
    pub fn for_outline(outline: &PlanarOutline, pitch: f64, margin: f64) -> Self {
        let b = outline.bounds();
        Self {
            origin: Point2::new(b.min.x + margin, b.min.y + margin),
            pitch,
            margin,
        }
    }

    pub fn position(&self, idx: GridIndex) -> Point2 {
        Point2::new(
            self.origin.x + idx.u as f64 * self.pitch,
            self.origin.y + idx.v as f64 * self.pitch,
        )
    }

    /// True when the site lies inside the outline inset by the margin.
    pub fn contains(&self, outline: &PlanarOutline, idx: GridIndex) -> bool {
        let p = self.position(idx);
        p.is_finite()
            && outline.contains(p)
            && outline.distance_to_boundary(p) >= self.margin - LENGTH_EPS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointGrid {
    pub frame: GridFrame,
    /// Row-major: `v` ascending, then `u` ascending.
    pub points: Vec<GridPoint>,
}

impl PointGrid {
    pub fn pitch(&self) -> f64 {
        self.frame.pitch
    }

    pub fn margin(&self) -> f64 {
        self.frame.margin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, idx: GridIndex) -> bool {
        self.points
            .binary_search_by(|p| (p.index.v, p.index.u).cmp(&(idx.v, idx.u)))
            .is_ok()
    }
}

/// Number of lattice columns and rows covering the inset bounding box.
pub fn lattice_extent(
    outline: &PlanarOutline,
    pitch: f64,
    margin: f64,
) -> Result<(i64, i64), GeometryError> {
    if !(pitch > 0.0) || !pitch.is_finite() {
        return Err(GeometryError::Domain(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(GeometryError::Domain(format!(
            "margin must be non-negative, got {margin}"
        )));
    }
    let frame = GridFrame::for_outline(outline, pitch, margin);
    let b = outline.bounds();
    let span_u = (b.max.x - margin - frame.origin.x) / pitch;
    let span_v = (b.max.y - margin - frame.origin.y) / pitch;
    if span_u < -LENGTH_EPS || span_v < -LENGTH_EPS {
        return Err(GeometryError::EmptyGrid { pitch, margin });
    }
    let nu = (span_u + 1e-9).floor().max(0.0) + 1.0;
    let nv = (span_v + 1e-9).floor().max(0.0) + 1.0;
    let count = nu * nv;
    if !count.is_finite() || count > MAX_GRID_POINTS as f64 {
        return Err(GeometryError::GridTooLarge {
            count: if count.is_finite() {
                count as u128
            } else {
                u128::MAX
            },
            limit: MAX_GRID_POINTS,
        });
    }
    Ok((nu as i64, nv as i64))
}

pub fn generate_point_grid(
    outline: &PlanarOutline,
    pitch: f64,
    margin: f64,
) -> Result<PointGrid, GeometryError> {
    let (nu, nv) = lattice_extent(outline, pitch, margin)?;
    let frame = GridFrame::for_outline(outline, pitch, margin);
    let mut points = Vec::new();
    for v in 0..nv {
        for u in 0..nu {
            let index = GridIndex::new(u, v);
            if frame.contains(outline, index) {
                points.push(GridPoint {
                    index,
                    position: frame.position(index),
                });
            }
        }
    }
    let grid = PointGrid { frame, points };
    // A lattice without a single neighbouring pair cannot carry any trace.
    let routable = grid.points.iter().any(|p| {
        grid.contains(GridIndex::new(p.index.u + 1, p.index.v))
            || grid.contains(GridIndex::new(p.index.u, p.index.v + 1))
    });
    if !routable {
        return Err(GeometryError::EmptyGrid { pitch, margin });
    }
    Ok(grid)
}
