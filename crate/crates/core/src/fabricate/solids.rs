use super::arrangement::Arrangement;
use super::FabricateError;
use crate::geometry::{Mesh, Point2, Point3, LENGTH_EPS};
use crate::layout::{
    derive_nets, disc_polygon, net_index, trace_shapes, validate_design, BoardDesign, Layer, Shape,
    VIA_BORE_RADIUS,
};
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Triangulation};
use std::collections::HashMap;

/// Facets per cylinder. Polygons are area-matched, so volumes stay exact.
pub const CYLINDER_FACETS: usize = 32;

/// Flat, as-printed solids. Both meshes are closed; the conductor mesh holds
/// one shell per connected conductor region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidSet {
    pub substrate: Mesh,
    pub conductor: Mesh,
}

const EMPTY: u32 = 0;
const SUBSTRATE: u32 = 1;
/// Conductor labels are `CONDUCTOR + net index`.
const CONDUCTOR: u32 = 2;

/// A prism footprint: polygon, vertical extent and what it does to the column.
struct Prism {
    poly: Vec<Point2>,
    lo: f64,
    hi: f64,
    /// `Some(net)` fills with conductor, `None` cuts an open hole.
    net: Option<usize>,
    element: String,
}

fn convex_contains(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    (0..n).all(|i| (poly[(i + 1) % n] - poly[i]).cross(p - poly[i]) >= 0.0)
}

fn prisms(board: &BoardDesign) -> Result<Vec<Prism>, FabricateError> {
    let frame = board
        .frame()
        .map_err(|e| FabricateError::Geometry(e.to_string()))?;
    let nets = net_index(&derive_nets(board));
    let d = board.depth();
    let net = |id: &str| nets.get(id).copied();
    let mut out = Vec::new();
    for t in &board.traces {
        let (lo, hi) = match t.layer {
            Layer::Top => (d - t.height, d),
            Layer::Bottom => (0.0, t.height),
        };
        for s in trace_shapes(t, &frame) {
            if let Shape::Polygon(poly) = s {
                out.push(Prism {
                    poly,
                    lo,
                    hi,
                    net: net(&t.id),
                    element: t.id.clone(),
                });
            }
        }
    }
    for v in &board.vias {
        let c = frame.position(v.at);
        out.push(Prism {
            poly: disc_polygon(c, v.radius, CYLINDER_FACETS),
            lo: 0.0,
            hi: d,
            net: net(&v.id),
            element: v.id.clone(),
        });
        out.push(Prism {
            poly: disc_polygon(c, VIA_BORE_RADIUS, CYLINDER_FACETS),
            lo: 0.0,
            hi: d,
            net: None,
            element: v.id.clone(),
        });
    }
    for s in &board.sockets {
        let c = frame.position(s.at);
        let (lo, hi) = s.z_range(&board.stackup);
        out.push(Prism {
            poly: disc_polygon(c, s.outer_radius(), CYLINDER_FACETS),
            lo,
            hi,
            net: net(&s.id),
            element: s.id.clone(),
        });
        out.push(Prism {
            poly: disc_polygon(c, s.radius, CYLINDER_FACETS),
            lo,
            hi,
            net: None,
            element: s.id.clone(),
        });
    }
    Ok(out)
}

/// Sorted distinct z levels, merging values closer than the length tolerance.
fn levels(board: &BoardDesign, prisms: &[Prism]) -> Vec<f64> {
    let mut z: Vec<f64> = vec![0.0, board.depth()];
    for p in prisms {
        z.push(p.lo);
        z.push(p.hi);
    }
    z.sort_by(f64::total_cmp);
    z.dedup_by(|a, b| (*a - *b).abs() <= LENGTH_EPS);
    z
}

/// Builds substrate and conductor solids. Traces are recessed flush into the
/// outer faces; vias are barrels with an open bore; sockets are sleeves with
/// an open bore that rise above the surface when deeper than their layer.
pub fn generate_solids(board: &BoardDesign) -> Result<SolidSet, FabricateError> {
    let errs = validate_design(board);
    if !errs.is_empty() {
        return Err(FabricateError::Structural(errs));
    }
    let outline = board
        .planar_outline()
        .map_err(|e| FabricateError::Geometry(e.to_string()))?;
    let prisms = prisms(board)?;
    let z = levels(board, &prisms);
    let depth = board.depth();

    let mut arr = Arrangement::default();
    arr.ring(outline.vertices());
    for p in &prisms {
        arr.ring(&p.poly);
    }
    if !arr.resolve() {
        return Err(FabricateError::Geometry(
            "footprint arrangement did not settle".into(),
        ));
    }
    let mut cdt: ConstrainedDelaunayTriangulation<spade::Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let handles = arr
        .points
        .iter()
        .map(|p| cdt.insert(spade::Point2::new(p.x, p.y)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FabricateError::Geometry(format!("triangulation failed: {e:?}")))?;
    for &(a, b) in &arr.segments {
        let (ha, hb) = (handles[a as usize], handles[b as usize]);
        if ha != hb && cdt.try_add_constraint(ha, hb).is_empty() {
            let (pa, pb) = (arr.points[a as usize], arr.points[b as usize]);
            return Err(FabricateError::Geometry(format!(
                "constraint ({}, {})-({}, {}) crosses another",
                pa.x, pa.y, pb.x, pb.y
            )));
        }
    }

    // Column labels per inner face and slab.
    let slabs = z.len() - 1;
    let nfaces = cdt.all_faces().len();
    let mut labels = vec![EMPTY; nfaces * slabs];
    for f in cdt.inner_faces() {
        let [a, b, c] = f.positions();
        let centroid = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        let inside = outline.contains(centroid);
        let hits: Vec<&Prism> = prisms
            .iter()
            .filter(|p| convex_contains(&p.poly, centroid))
            .collect();
        let fi = f.fix().index();
        for s in 0..slabs {
            let zm = 0.5 * (z[s] + z[s + 1]);
            let mut label = if inside && zm > 0.0 && zm < depth {
                SUBSTRATE
            } else {
                EMPTY
            };
            let mut owner: Option<&Prism> = None;
            for p in hits
                .iter()
                .filter(|p| p.net.is_some() && p.lo < zm && zm < p.hi)
            {
                if let Some(o) = owner {
                    if o.net != p.net {
                        return Err(overlap(&o.element, &p.element));
                    }
                }
                owner = Some(p);
                label = CONDUCTOR + p.net.unwrap_or(0) as u32;
            }
            if hits
                .iter()
                .any(|p| p.net.is_none() && p.lo < zm && zm < p.hi)
            {
                label = EMPTY;
            }
            labels[fi * slabs + s] = label;
        }
    }

    // Touching distinct nets across a shared face are shorted as well.
    let element_at = |s: usize, centroid: Point2| -> String {
        let zm = 0.5 * (z[s] + z[s + 1]);
        prisms
            .iter()
            .find(|p| {
                p.net.is_some() && p.lo < zm && zm < p.hi && convex_contains(&p.poly, centroid)
            })
            .map(|p| p.element.clone())
            .unwrap_or_default()
    };
    let centroid_of = |f: spade::handles::FaceHandle<'_, spade::handles::InnerTag, _, _, _, _>| {
        let [a, b, c] = f.positions();
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    };
    for f in cdt.inner_faces() {
        let fi = f.fix().index();
        for e in f.adjacent_edges() {
            let Some(nb) = e.rev().face().as_inner() else {
                continue;
            };
            let ni = nb.fix().index();
            if ni < fi {
                continue;
            }
            for s in 0..slabs {
                let (la, lb) = (labels[fi * slabs + s], labels[ni * slabs + s]);
                if la >= CONDUCTOR && lb >= CONDUCTOR && la != lb {
                    return Err(overlap(
                        &element_at(s, centroid_of(f)),
                        &element_at(s, centroid_of(nb)),
                    ));
                }
            }
        }
        for s in 1..slabs {
            let (la, lb) = (labels[fi * slabs + s - 1], labels[fi * slabs + s]);
            if la >= CONDUCTOR && lb >= CONDUCTOR && la != lb {
                let c = centroid_of(f);
                return Err(overlap(&element_at(s - 1, c), &element_at(s, c)));
            }
        }
    }

    let class = |l: u32| if l >= CONDUCTOR { CONDUCTOR } else { l };
    let mut meshes = [MeshBuilder::default(), MeshBuilder::default()];
    for (m, material) in [(0usize, SUBSTRATE), (1, CONDUCTOR)] {
        let mb = &mut meshes[m];
        let label = |fi: usize, s: isize| -> u32 {
            if s < 0 || s as usize >= slabs {
                EMPTY
            } else {
                class(labels[fi * slabs + s as usize])
            }
        };
        for (k, &zk) in z.iter().enumerate() {
            for f in cdt.inner_faces() {
                let fi = f.fix().index();
                let below = label(fi, k as isize - 1) == material;
                let above = label(fi, k as isize) == material;
                if below == above {
                    continue;
                }
                let vs = f.vertices().map(|v| (v.fix().index(), v.position()));
                let mut tri = vs.map(|(i, p)| mb.vertex(i, k, Point3::new(p.x, p.y, zk)));
                if above {
                    tri.swap(1, 2);
                }
                mb.triangles.push(tri);
            }
        }
        for s in 0..slabs {
            for f in cdt.inner_faces() {
                let fi = f.fix().index();
                if label(fi, s as isize) != material {
                    continue;
                }
                for e in f.adjacent_edges() {
                    let open = match e.rev().face().as_inner() {
                        Some(nb) => label(nb.fix().index(), s as isize) != material,
                        None => true,
                    };
                    if !open {
                        continue;
                    }
                    let (a, b) = (e.from(), e.to());
                    let (pa, pb) = (a.position(), b.position());
                    let a0 = mb.vertex(a.fix().index(), s, Point3::new(pa.x, pa.y, z[s]));
                    let b0 = mb.vertex(b.fix().index(), s, Point3::new(pb.x, pb.y, z[s]));
                    let a1 = mb.vertex(a.fix().index(), s + 1, Point3::new(pa.x, pa.y, z[s + 1]));
                    let b1 = mb.vertex(b.fix().index(), s + 1, Point3::new(pb.x, pb.y, z[s + 1]));
                    mb.triangles.push([a0, b0, b1]);
                    mb.triangles.push([a0, b1, a1]);
                }
            }
        }
    }
    let [sub, con] = meshes.map(MeshBuilder::finish);
    for (name, m) in [("substrate", &sub), ("conductor", &con)] {
        let defects = m.defects();
        if !defects.is_empty() {
            return Err(FabricateError::NotWatertight {
                mesh: name.into(),
                defects: defects.iter().take(16).map(|d| d.to_string()).collect(),
            });
        }
    }
    Ok(SolidSet {
        substrate: sub,
        conductor: con,
    })
}

fn overlap(a: &str, b: &str) -> FabricateError {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    FabricateError::Overlap {
        a: a.into(),
        b: b.into(),
    }
}

#[derive(Default)]
struct MeshBuilder {
    index: HashMap<(usize, usize), u32>,
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
}

impl MeshBuilder {
    fn vertex(&mut self, v: usize, level: usize, p: Point3) -> u32 {
        *self.index.entry((v, level)).or_insert_with(|| {
            self.vertices.push(p);
            (self.vertices.len() - 1) as u32
        })
    }

    fn finish(self) -> Mesh {
        let mut m = Mesh {
            vertices: self.vertices,
            triangles: self.triangles,
        };
        collapse_short_edges(&mut m);
        split_slivers(&mut m);
        m
    }
}

/// Constraint crossings can land within an ulp of an existing vertex.
/// Such vertex pairs are merged and the triangles they flatten are dropped.
fn collapse_short_edges(m: &mut Mesh) {
    let n = m.vertices.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn root(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    let mut merged = false;
    for t in &m.triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if (m.vertices[a as usize] - m.vertices[b as usize]).norm() <= LENGTH_EPS {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb) as usize] = ra.min(rb);
                    merged = true;
                }
            }
        }
    }
    if !merged {
        return;
    }
    let mut remap = vec![u32::MAX; n];
    let mut vertices = Vec::new();
    for v in 0..n as u32 {
        let r = root(&mut parent, v);
        if remap[r as usize] == u32::MAX {
            remap[r as usize] = vertices.len() as u32;
            vertices.push(m.vertices[r as usize]);
        }
        remap[v as usize] = remap[r as usize];
    }
    m.triangles = m
        .triangles
        .iter()
        .map(|t| t.map(|v| remap[v as usize]))
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[2] != t[0])
        .collect();
    m.vertices = vertices;
}

/// A cap triangle whose apex sits on its long edge (a split point that came
/// out a hair off a diagonal constraint) has no area. The neighbour across
/// the long edge is split at the apex and the sliver dropped; every edge
/// stays paired, so closure is preserved.
fn split_slivers(m: &mut Mesh) {
    let degenerate = |m: &Mesh, t: usize| {
        let [a, b, c] = m.triangle(t);
        (b - a).cross(c - a).norm() <= 1e-12
    };
    for _ in 0..m.triangles.len() {
        let Some(t) = (0..m.triangles.len()).find(|&t| degenerate(m, t)) else {
            return;
        };
        let tri = m.triangles[t];
        let p = tri.map(|i| m.vertices[i as usize]);
        // Long edge (a, b) with apex c, keeping the winding.
        let k = (0..3)
            .max_by(|&i, &j| {
                let li = (p[(i + 1) % 3] - p[i]).norm();
                let lj = (p[(j + 1) % 3] - p[j]).norm();
                li.total_cmp(&lj)
            })
            .unwrap_or(0);
        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let (pa, pb, pc) = (
            m.vertices[a as usize],
            m.vertices[b as usize],
            m.vertices[c as usize],
        );
        let ab = pb - pa;
        let s = (pc - pa).dot(ab) / ab.dot(ab);
        if !(s > 0.0 && s < 1.0) || (pc - pa).norm() <= LENGTH_EPS || (pc - pb).norm() <= LENGTH_EPS
        {
            return;
        }
        let Some((u, e)) = m.triangles.iter().enumerate().find_map(|(u, q)| {
            (0..3)
                .find(|&e| q[e] == b && q[(e + 1) % 3] == a)
                .map(|e| (u, e))
        }) else {
            return;
        };
        let d = m.triangles[u][(e + 2) % 3];
        m.triangles[u] = [b, c, d];
        m.triangles.push([c, a, d]);
        m.triangles.swap_remove(t);
    }
}
