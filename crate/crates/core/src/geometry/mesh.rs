use super::{GeometryError, Point3};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Indexed triangle set. Triangles wind counter-clockwise seen from outside.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeshDefect {
    IndexOutOfRange {
        triangle: usize,
    },
    Degenerate {
        triangle: usize,
    },
    /// Undirected edge `a-b` used by `count` triangles, or twice with the same direction.
    OpenEdge {
        a: u32,
        b: u32,
        count: usize,
    },
}

impl fmt::Display for MeshDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshDefect::IndexOutOfRange { triangle } => {
                write!(f, "triangle {triangle} references a missing vertex")
            }
            MeshDefect::Degenerate { triangle } => write!(f, "triangle {triangle} has zero area"),
            MeshDefect::OpenEdge { a, b, count } => {
                write!(f, "edge {a}-{b} is shared by {count} triangle(s)")
            }
        }
    }
}

impl Mesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let m = Self {
            vertices,
            triangles,
        };
        if let Some(d) = m.index_and_area_defects().into_iter().next() {
            return Err(GeometryError::Mesh(d.to_string()));
        }
        Ok(m)
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Volume enclosed, via the sum of signed tetrahedra against the origin.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                (b - a).cross(c - a).norm() * 0.5
            })
            .sum()
    }

    fn index_and_area_defects(&self) -> Vec<MeshDefect> {
        let n = self.vertices.len() as u32;
        let mut out = Vec::new();
        for (i, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                out.push(MeshDefect::IndexOutOfRange { triangle: i });
                continue;
            }
            let [a, b, c] = self.triangle(i);
            if (b - a).cross(c - a).norm() <= 1e-12 {
                out.push(MeshDefect::Degenerate { triangle: i });
            }
        }
        out
    }

    /// Every edge that is not shared by exactly two oppositely wound triangles.
    pub fn open_edges(&self) -> Vec<MeshDefect> {
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                *directed.entry((tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut undirected: HashMap<(u32, u32), (usize, usize)> = HashMap::new();
        for (&(a, b), &n) in &directed {
            let key = (a.min(b), a.max(b));
            let e = undirected.entry(key).or_default();
            if a < b {
                e.0 += n;
            } else {
                e.1 += n;
            }
        }
        let mut out: Vec<MeshDefect> = undirected
            .into_iter()
            .filter(|(_, (fwd, back))| !(*fwd == 1 && *back == 1))
            .map(|((a, b), (fwd, back))| MeshDefect::OpenEdge {
                a,
                b,
                count: fwd + back,
            })
            .collect();
        out.sort_by_key(|d| match d {
            MeshDefect::OpenEdge { a, b, .. } => (*a, *b),
            _ => (0, 0),
        });
        out
    }

    /// All structural defects: bad indices, zero-area faces and open edges.
    pub fn defects(&self) -> Vec<MeshDefect> {
        let mut d = self.index_and_area_defects();
        if d.iter()
            .any(|x| matches!(x, MeshDefect::IndexOutOfRange { .. }))
        {
            return d;
        }
        d.extend(self.open_edges());
        d
    }

    pub fn is_watertight(&self) -> bool {
        self.defects().is_empty()
    }

    /// Appends `other`, offsetting its indices.
    pub fn append(&mut self, other: &Mesh) {
        let off = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + off, t[1] + off, t[2] + off]),
        );
    }

    pub fn translated(&self, d: Point3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|&p| p + d).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Axis-aligned unit cube `[0,1]^3`, 8 vertices and 12 outward-wound triangles.
    pub fn unit_cube() -> Mesh {
        let v = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
        Mesh {
            vertices: vec![
                v(0.0, 0.0, 0.0),
                v(1.0, 0.0, 0.0),
                v(1.0, 1.0, 0.0),
                v(0.0, 1.0, 0.0),
                v(0.0, 0.0, 1.0),
                v(1.0, 0.0, 1.0),
                v(1.0, 1.0, 1.0),
                v(0.0, 1.0, 1.0),
            ],
            triangles: vec![
                [0, 2, 1],
                [0, 3, 2],
                [4, 5, 6],
                [4, 6, 7],
                [0, 1, 5],
                [0, 5, 4],
                [1, 2, 6],
                [1, 6, 5],
                [2, 3, 7],
                [2, 7, 6],
                [3, 0, 4],
                [3, 4, 7],
            ],
        }
    }
}
