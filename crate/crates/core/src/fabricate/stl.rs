use super::FabricateError;
use crate::geometry::Mesh;

/// Fixed 80-byte header tag; no timestamps so output is bit-deterministic.
/// Deliberately does not start with `solid` so readers never mistake it for ASCII STL.
pub const STL_HEADER: &[u8; 80] =
    b"tcbforge binary STL                                                             ";

/// Little-endian binary STL. Normals are recomputed from the winding and
/// triangles keep mesh order. Open meshes are refused.
pub fn export_stl(mesh: &Mesh) -> Result<Vec<u8>, FabricateError> {
    let defects = mesh.defects();
    if !defects.is_empty() {
        return Err(FabricateError::NotWatertight {
            mesh: "export".into(),
            defects: defects.iter().map(|d| d.to_string()).collect(),
        });
    }
    let n = mesh.triangles.len();
    let mut out = Vec::with_capacity(84 + 50 * n);
    out.extend_from_slice(STL_HEADER);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for t in 0..n {
        let [a, b, c] = mesh.triangle(t);
        let nrm = (b - a).cross(c - a);
        let len = nrm.norm();
        let nrm = if len > 0.0 { nrm * (1.0 / len) } else { nrm };
        for p in [nrm, a, b, c] {
            for v in [p.x, p.y, p.z] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    Ok(out)
}
