//! Line-oriented text format.
//!
//! ```text
//! condenser-mesh 1
//! level 0
//! vertices N
//! x y tag
//! triangles T
//! i j k
//! edges E
//! i j tag curve
//! curves C
//! {json primitive}
//! corners K
//! i kind
//! ```
//!
//! Floats are written in shortest round-trip form, so reading back a written
//! mesh reproduces it bit for bit.

use std::fmt::Write as _;

use super::{ConstraintEdge, CornerKind, EdgeTag, Mesh, MeshError, VertexTag};
use crate::geometry::{ArcSegment, Point};

pub const MESH_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "condenser-mesh";

fn corner_code(k: CornerKind) -> String {
    serde_json::to_string(&k).expect("enum serializes").trim_matches('"').to_string()
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {MESH_FORMAT_VERSION}");
    let _ = writeln!(s, "level {}", mesh.level);
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for (p, t) in mesh.vertices.iter().zip(&mesh.tags) {
        let _ = writeln!(s, "{:?} {:?} {}", p.x, p.y, t.code());
    }
    let _ = writeln!(s, "triangles {}", mesh.triangles.len());
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(s, "{a} {b} {c}");
    }
    let _ = writeln!(s, "edges {}", mesh.edges.len());
    for e in &mesh.edges {
        let _ = writeln!(s, "{} {} {} {}", e.a, e.b, e.tag.code(), e.curve);
    }
    let _ = writeln!(s, "curves {}", mesh.curves.len());
    for c in &mesh.curves {
        let _ = writeln!(s, "{}", serde_json::to_string(c).expect("primitive serializes"));
    }
    let _ = writeln!(s, "corners {}", mesh.corners.len());
    for (i, k) in &mesh.corners {
        let _ = writeln!(s, "{i} {}", corner_code(*k));
    }
    s
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), MeshError> {
        loop {
            match self.it.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((n, l)) => return Ok((n + 1, l.trim())),
                None => return Err(MeshError::Format("unexpected end of file".into())),
            }
        }
    }

    fn header(&mut self, key: &str) -> Result<usize, MeshError> {
        let (n, l) = self.next()?;
        let mut w = l.split_whitespace();
        match (w.next(), w.next().and_then(|c| c.parse().ok()), w.next()) {
            (Some(k), Some(c), None) if k == key => Ok(c),
            _ => Err(MeshError::Format(format!("line {n}: expected `{key} <count>`"))),
        }
    }
}

fn field<T: std::str::FromStr>(n: usize, w: Option<&str>) -> Result<T, MeshError> {
    w.and_then(|s| s.parse().ok()).ok_or_else(|| MeshError::Format(format!("line {n}: bad field")))
}

fn fields(n: usize, l: &str, count: usize) -> Result<Vec<&str>, MeshError> {
    let w: Vec<&str> = l.split_whitespace().collect();
    if w.len() != count {
        return Err(MeshError::Format(format!("line {n}: expected {count} fields, found {}", w.len())));
    }
    Ok(w)
}

/// Parses a mesh and checks its invariants.
pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines { it: text.lines().enumerate() };
    let (n, first) = lines.next()?;
    let version: u32 = match first.split_once(' ') {
        Some((MAGIC, v)) => field(n, Some(v))?,
        _ => return Err(MeshError::Format("not a condenser mesh file".into())),
    };
    if version != MESH_FORMAT_VERSION {
        return Err(MeshError::Format(format!("unsupported mesh format version {version}")));
    }
    let level = lines.header("level")? as u32;

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    let mut tags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next()?;
        let w = fields(n, l, 3)?;
        vertices.push(Point::new(field(n, Some(w[0]))?, field(n, Some(w[1]))?));
        tags.push(VertexTag::from_code(w[2]).ok_or_else(|| MeshError::Format(format!("line {n}: bad vertex tag")))?);
    }
    let nt = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, l) = lines.next()?;
        let w = fields(n, l, 3)?;
        triangles.push([field(n, Some(w[0]))?, field(n, Some(w[1]))?, field(n, Some(w[2]))?]);
    }
    let ne = lines.header("edges")?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, l) = lines.next()?;
        let w = fields(n, l, 4)?;
        let tag = EdgeTag::from_code(w[2]).ok_or_else(|| MeshError::Format(format!("line {n}: bad edge tag")))?;
        edges.push(ConstraintEdge { a: field(n, Some(w[0]))?, b: field(n, Some(w[1]))?, tag, curve: field(n, Some(w[3]))? });
    }
    let nc = lines.header("curves")?;
    let mut curves = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (n, l) = lines.next()?;
        let c: ArcSegment = serde_json::from_str(l).map_err(|e| MeshError::Format(format!("line {n}: {e}")))?;
        curves.push(c);
    }
    let nk = lines.header("corners")?;
    let mut corners = Vec::with_capacity(nk);
    for _ in 0..nk {
        let (n, l) = lines.next()?;
        let w = fields(n, l, 2)?;
        let kind: CornerKind = serde_json::from_str(&format!("\"{}\"", w[1]))
            .map_err(|_| MeshError::Format(format!("line {n}: bad corner kind")))?;
        let i: usize = field(n, Some(w[0]))?;
        if i >= vertices.len() {
            return Err(MeshError::Format(format!("line {n}: corner vertex out of range")));
        }
        corners.push((i, kind));
    }
    let mesh = Mesh { vertices, tags, triangles, edges, curves, corners, level };
    mesh.check_invariants()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_circular_maze;
    use crate::mesh::{discretize_boundary, refine_uniform, triangulate, TriangulateOptions};

    #[test]
    fn bit_exact_round_trip() {
        let spec = build_circular_maze(5).unwrap();
        let p = discretize_boundary(&spec, 2e-3).unwrap();
        let m = refine_uniform(&triangulate(&p, &TriangulateOptions::with_max_area(1e-2)).unwrap()).unwrap();
        let text = write_mesh(&m);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back, m);
        assert!(back.vertices.iter().zip(&m.vertices).all(|(a, b)| a.x.to_bits() == b.x.to_bits() && a.y.to_bits() == b.y.to_bits()));
        assert_eq!(write_mesh(&back), text);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_mesh(""), Err(MeshError::Format(_))));
        assert!(matches!(read_mesh("condenser-mesh 9\n"), Err(MeshError::Format(_))));
        let bad = "condenser-mesh 1\nlevel 0\nvertices 1\n0.0 0.0 z\n";
        assert!(matches!(read_mesh(bad), Err(MeshError::Format(_))));
    }
}
