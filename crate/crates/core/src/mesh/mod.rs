//! Conforming triangulations of condenser domains.
//!
//! [`discretize_boundary`] turns a spec into a planar straight-line graph,
//! [`triangulate`] meshes it, [`refine_corners`] grades the mesh toward
//! singular points and [`refine_uniform`] produces nested red refinements
//! with boundary midpoints snapped back onto the exact curves.

mod io;
mod pslg;
mod refine;
mod triangulate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ArcSegment, Point};

pub use io::{read_mesh, write_mesh, MESH_FORMAT_VERSION};
pub use pslg::{discretize_boundary, discretize_boundary_with, CornerKind, LoopKind, Pslg, PslgEdge};
pub use refine::{refine_corners, refine_uniform, CornerGrading};
pub use triangulate::{triangulate, TriangulateOptions};

/// Triangles whose twice-area falls below this times the squared longest
/// edge are rejected as degenerate.
pub const AREA_EPS: f64 = 1e-16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("chord tolerance {chord_tol:e} exceeds half the clearance {clearance:e}")]
    ChordTooCoarse { chord_tol: f64, clearance: f64 },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("constraint edges cross")]
    CrossingConstraints,
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("invalid refinement parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh invariant violated: {0}")]
    Invariant(String),
    #[error("mesh file: {0}")]
    Format(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexTag {
    Interior,
    /// On `∂Ω` (loops and walls): Dirichlet value 0.
    Outer,
    /// On `K`: Dirichlet value 1.
    Compact,
}

impl VertexTag {
    pub fn code(self) -> &'static str {
        match self {
            VertexTag::Interior => "i",
            VertexTag::Outer => "o",
            VertexTag::Compact => "k",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "i" => Some(VertexTag::Interior),
            "o" => Some(VertexTag::Outer),
            "k" => Some(VertexTag::Compact),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    Outer,
    Wall,
    Compact,
}

impl EdgeTag {
    pub fn vertex_tag(self) -> VertexTag {
        match self {
            EdgeTag::Outer | EdgeTag::Wall => VertexTag::Outer,
            EdgeTag::Compact => VertexTag::Compact,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            EdgeTag::Outer => "o",
            EdgeTag::Wall => "w",
            EdgeTag::Compact => "k",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "o" => Some(EdgeTag::Outer),
            "w" => Some(EdgeTag::Wall),
            "k" => Some(EdgeTag::Compact),
            _ => None,
        }
    }
}

/// A constraint edge of the mesh lying on the exact curve `curves[curve]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintEdge {
    pub a: usize,
    pub b: usize,
    pub tag: EdgeTag,
    pub curve: usize,
}

/// A conforming triangulation of `Ω` with boundary and compact tags.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub tags: Vec<VertexTag>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<ConstraintEdge>,
    /// Exact curves carrying the constraint edges.
    pub curves: Vec<ArcSegment>,
    /// Vertices where the solution is singular, used for grading.
    pub corners: Vec<(usize, CornerKind)>,
    /// Number of uniform refinements applied.
    pub level: u32,
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub(crate) fn twice_area(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Positive orientation with a scale-free degeneracy threshold.
pub(crate) fn is_proper(a: Point, b: Point, c: Point) -> bool {
    let longest = a.dist(b).max(b.dist(c)).max(c.dist(a));
    twice_area(a, b, c) > AREA_EPS * longest * longest
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * twice_area(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    /// Edge → incident triangles (one or two).
    pub fn edge_triangles(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(3 * self.triangles.len() / 2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        map
    }

    /// Distinct edges in first-seen order.
    pub fn unique_edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::with_capacity(3 * self.triangles.len() / 2);
        let mut out = Vec::with_capacity(3 * self.triangles.len() / 2);
        for tri in &self.triangles {
            for k in 0..3 {
                let e = edge_key(tri[k], tri[(k + 1) % 3]);
                if seen.insert(e, ()).is_none() {
                    out.push(e);
                }
            }
        }
        out
    }

    /// Number of boundary components (closed cycles of edges with a single
    /// incident triangle).
    pub fn boundary_components(&self) -> usize {
        let map = self.edge_triangles();
        let mut parent: HashMap<usize, usize> = HashMap::new();
        fn find(p: &mut HashMap<usize, usize>, x: usize) -> usize {
            let mut r = x;
            while let Some(&q) = p.get(&r) {
                if q == r {
                    break;
                }
                r = q;
            }
            p.insert(x, r);
            r
        }
        for (&(a, b), ts) in &map {
            if ts.len() == 1 {
                parent.entry(a).or_insert(a);
                parent.entry(b).or_insert(b);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent.insert(ra.max(rb), ra.min(rb));
                }
            }
        }
        let keys: Vec<usize> = parent.keys().copied().collect();
        let mut roots: Vec<usize> = keys.into_iter().map(|k| find(&mut parent, k)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.unique_edges().len() as i64 + self.triangles.len() as i64
    }

    /// Asserts orientation, non-degeneracy, conformity (every edge has one or
    /// two triangles and every boundary edge is a constraint edge),
    /// constraint edges being mesh edges, and tag consistency.
    pub fn check_invariants(&self) -> Result<(), MeshError> {
        let fail = |m: String| Err(MeshError::Invariant(m));
        if self.tags.len() != self.vertices.len() {
            return fail("tag count differs from vertex count".into());
        }
        let mut used = vec![false; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= self.vertices.len()) {
                return fail(format!("triangle {t} has an out-of-range vertex"));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return fail(format!("triangle {t} repeats a vertex"));
            }
            let [a, b, c] = self.triangle_points(t);
            if !is_proper(a, b, c) {
                return fail(format!("triangle {t} is not positively oriented (2A = {:e})", twice_area(a, b, c)));
            }
            for &i in tri {
                used[i] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return fail(format!("vertex {i} belongs to no triangle"));
        }
        let map = self.edge_triangles();
        for (e, ts) in &map {
            if ts.len() > 2 {
                return fail(format!("edge {e:?} shared by {} triangles", ts.len()));
            }
        }
        // a hanging vertex leaves an edge with one triangle that is not part
        // of the boundary
        let constrained: HashMap<(usize, usize), EdgeTag> =
            self.edges.iter().map(|e| (edge_key(e.a, e.b), e.tag)).collect();
        let mut free: Vec<(usize, usize)> = map
            .iter()
            .filter(|(e, ts)| ts.len() == 1 && !constrained.contains_key(e))
            .map(|(e, _)| *e)
            .collect();
        free.sort_unstable();
        if let Some((a, b)) = free.first() {
            return fail(format!("edge ({a}, {b}) is on the mesh boundary but not on ∂Ω or K"));
        }
        for e in &self.edges {
            if !map.contains_key(&edge_key(e.a, e.b)) {
                return fail(format!("constraint edge ({}, {}) is not a mesh edge", e.a, e.b));
            }
            if e.curve >= self.curves.len() {
                return fail(format!("constraint edge ({}, {}) has no curve", e.a, e.b));
            }
            for v in [e.a, e.b] {
                if self.tags[v] != e.tag.vertex_tag() {
                    return fail(format!("vertex {v} on a {:?} edge is tagged {:?}", e.tag, self.tags[v]));
                }
            }
        }
        Ok(())
    }

    /// Largest distance from a tagged vertex to the exact curve of an edge
    /// through it.
    pub fn max_curve_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.edges {
            let c = &self.curves[e.curve];
            worst = worst.max(c.distance(self.vertices[e.a])).max(c.distance(self.vertices[e.b]));
        }
        worst
    }

    /// Largest distance from a constraint-edge midpoint to its exact curve.
    pub fn max_chord_deviation(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| self.curves[e.curve].distance(self.vertices[e.a].midpoint(self.vertices[e.b])))
            .fold(0.0, f64::max)
    }

    /// Minimum distance between a compact-tagged and an outer-tagged vertex.
    pub fn discrete_clearance(&self) -> f64 {
        let outer: Vec<usize> = (0..self.vertices.len()).filter(|&i| self.tags[i] == VertexTag::Outer).collect();
        let grid = PointGrid::new(&self.vertices, &outer);
        let mut best = f64::INFINITY;
        for (i, &t) in self.tags.iter().enumerate() {
            if t == VertexTag::Compact {
                if let Some(d) = grid.nearest_distance(self.vertices[i]) {
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Uniform bucket grid over a subset of points.
pub(crate) struct PointGrid<'a> {
    points: &'a [Point],
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointGrid<'a> {
    pub(crate) fn new(points: &'a [Point], subset: &[usize]) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &i in subset {
            let p = points[i];
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if subset.is_empty() {
            lo = Point::ORIGIN;
            hi = Point::new(1.0, 1.0);
        }
        let n = (subset.len() as f64).sqrt().ceil().max(1.0) as usize;
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let cell = span / n as f64 * (1.0 + 1e-9);
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut g = PointGrid {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for &i in subset {
            let (cx, cy) = g.cell_of(points[i]);
            buckets[cy * nx + cx].push(i);
        }
        g.buckets = buckets;
        g
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.origin.x) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((p.y - self.origin.y) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    pub(crate) fn nearest_distance(&self, p: Point) -> Option<f64> {
        let (cx, cy) = self.cell_of(p);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let r = ring as i64;
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let (x, y) = (cx as i64 + dx, cy as i64 + dy);
                    if x < 0 || y < 0 || x >= self.nx as i64 || y >= self.ny as i64 {
                        continue;
                    }
                    for &i in &self.buckets[y as usize * self.nx + x as usize] {
                        best = best.min(self.points[i].dist(p));
                    }
                }
            }
            // every unvisited cell is at least `ring * cell` away
            if best <= ring as f64 * self.cell {
                break;
            }
        }
        best.is_finite().then_some(best)
    }
}
