use std::collections::HashMap;

use super::{edge_key, twice_area, ConstraintEdge, EdgeTag, Mesh, MeshError, VertexTag, is_proper};
use crate::geometry::Point;

/// Geometric grading toward corner vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CornerGrading {
    /// Layer radius ratio, in (0, 1).
    pub q: f64,
    pub levels: u32,
    /// Radius of the graded zone around each corner (local feature size).
    pub radius: f64,
    /// Element diameter over distance to the corner inside the zone.
    pub size_ratio: f64,
}

impl CornerGrading {
    pub fn new(radius: f64) -> Self {
        CornerGrading { q: 0.15, levels: 6, radius, size_ratio: 2.0 }
    }

    /// Radius of the innermost layer.
    pub fn innermost(&self) -> f64 {
        self.radius * self.q.powi(self.levels as i32)
    }

    fn target(&self, dist: f64) -> f64 {
        self.size_ratio * dist.max(self.innermost())
    }
}

fn point_triangle_distance(p: Point, [a, b, c]: [Point; 3]) -> f64 {
    let inside = twice_area(a, b, p) >= 0.0 && twice_area(b, c, p) >= 0.0 && twice_area(c, a, p) >= 0.0;
    if inside {
        return 0.0;
    }
    let seg = |u: Point, v: Point| {
        let d = v - u;
        let t = ((p - u).dot(d) / d.norm2()).clamp(0.0, 1.0);
        p.dist(u + d * t)
    };
    seg(a, b).min(seg(b, c)).min(seg(c, a))
}

/// Moves vertex `m` onto `target`, or as far toward it as keeps every
/// triangle of `fan` proper, halving the step up to [`SNAP_HALVINGS`] times.
/// The plain midpoint is always proper, so `m` stays put in the worst case.
fn snap(vertices: &mut [Point], m: usize, target: Point, fan: &[[usize; 3]]) -> bool {
    let start = vertices[m];
    let mut step = 1.0;
    for _ in 0..=SNAP_HALVINGS {
        vertices[m] = start.lerp(target, step);
        if fan.iter().all(|t| is_proper(vertices[t[0]], vertices[t[1]], vertices[t[2]])) {
            return step == 1.0;
        }
        step *= 0.5;
    }
    vertices[m] = start;
    false
}

/// Step halvings tried by [`snap`] before a midpoint is left unsnapped.
const SNAP_HALVINGS: u32 = 8;

/// Mutable triangulation with edge adjacency.
struct Work {
    vertices: Vec<Point>,
    tags: Vec<VertexTag>,
    tris: Vec<[usize; 3]>,
    adj: HashMap<(usize, usize), [usize; 2]>,
    constraint: HashMap<(usize, usize), (EdgeTag, usize)>,
    curves: Vec<crate::geometry::ArcSegment>,
    /// Pre-existing triangles modified since the last drain.
    dirty: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Work {
    fn new(mesh: &Mesh) -> Self {
        let mut w = Work {
            vertices: mesh.vertices.clone(),
            tags: mesh.tags.clone(),
            tris: mesh.triangles.clone(),
            adj: HashMap::new(),
            constraint: mesh.edges.iter().map(|e| (edge_key(e.a, e.b), (e.tag, e.curve))).collect(),
            curves: mesh.curves.clone(),
            dirty: Vec::new(),
        };
        for t in 0..w.tris.len() {
            let tri = w.tris[t];
            for k in 0..3 {
                w.attach(tri[k], tri[(k + 1) % 3], t);
            }
        }
        w
    }

    fn attach(&mut self, a: usize, b: usize, t: usize) {
        let slot = self.adj.entry(edge_key(a, b)).or_insert([NONE, NONE]);
        if slot[0] == NONE {
            slot[0] = t;
        } else {
            slot[1] = t;
        }
    }

    fn detach(&mut self, a: usize, b: usize, t: usize) {
        let key = edge_key(a, b);
        let slot = self.adj.get_mut(&key).expect("edge in adjacency");
        if slot[0] == t {
            slot[0] = slot[1];
        }
        slot[1] = NONE;
        if slot[0] == NONE {
            self.adj.remove(&key);
        }
    }

    fn replace(&mut self, a: usize, b: usize, old: usize, new: usize) {
        let slot = self.adj.get_mut(&edge_key(a, b)).expect("edge in adjacency");
        for s in slot.iter_mut() {
            if *s == old {
                *s = new;
            }
        }
    }

    /// Orders edges by length with a vertex-index tie-break, so that the
    /// longest edge of a triangle is unique and agreed on by both neighbours.
    fn edge_rank(&self, a: usize, b: usize) -> (f64, usize, usize) {
        let (x, y) = edge_key(a, b);
        (self.vertices[a].dist(self.vertices[b]).powi(2), x, y)
    }

    fn longest(&self, t: usize) -> (usize, usize) {
        let tri = self.tris[t];
        let mut best = (tri[0], tri[1]);
        for k in 1..3 {
            let e = (tri[k], tri[(k + 1) % 3]);
            if self.edge_rank(e.0, e.1).partial_cmp(&self.edge_rank(best.0, best.1)) == Some(std::cmp::Ordering::Greater) {
                best = e;
            }
        }
        best
    }

    fn neighbor(&self, t: usize, a: usize, b: usize) -> Option<usize> {
        let slot = self.adj[&edge_key(a, b)];
        [slot[0], slot[1]].into_iter().find(|&s| s != NONE && s != t)
    }

    fn new_midpoint(&mut self, a: usize, b: usize, tag: VertexTag) -> usize {
        self.vertices.push(self.vertices[a].midpoint(self.vertices[b]));
        self.tags.push(tag);
        self.vertices.len() - 1
    }

    /// Splits triangle t through edge (a, b) at vertex m.
    fn split(&mut self, t: usize, a: usize, b: usize, m: usize) -> usize {
        let tri = self.tris[t];
        let k = (0..3).find(|&k| edge_key(tri[k], tri[(k + 1) % 3]) == edge_key(a, b)).expect("edge of triangle");
        let (p, q, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        let child = self.tris.len();
        self.dirty.push(t);
        self.tris[t] = [p, m, c];
        self.tris.push([m, q, c]);
        self.detach(p, q, t);
        self.replace(q, c, t, child);
        self.attach(p, m, t);
        self.attach(m, q, child);
        self.attach(m, c, t);
        self.attach(m, c, child);
        child
    }

    /// Bisects an edge and every triangle on it, splitting constraint edges.
    fn bisect_edge(&mut self, a: usize, b: usize) {
        let slot = self.adj[&edge_key(a, b)];
        let constraint = self.constraint.remove(&edge_key(a, b));
        let m = self.new_midpoint(a, b, constraint.map_or(VertexTag::Interior, |c| c.0.vertex_tag()));
        let mut around = Vec::with_capacity(4);
        for t in slot {
            if t != NONE {
                around.push(t);
                around.push(self.split(t, a, b, m));
            }
        }
        if let Some((tag, curve)) = constraint {
            self.constraint.insert(edge_key(a, m), (tag, curve));
            self.constraint.insert(edge_key(m, b), (tag, curve));
            let target = self.curves[curve].project(self.vertices[m]);
            let fan: Vec<[usize; 3]> = around.iter().map(|&t| self.tris[t]).collect();
            snap(&mut self.vertices, m, target, &fan);
        }
    }

    /// Longest-edge propagation bisection until triangle t is split.
    fn lepp_bisect(&mut self, t: usize) {
        let original = self.tris[t];
        while self.tris[t] == original {
            let mut cur = t;
            loop {
                let (a, b) = self.longest(cur);
                match self.neighbor(cur, a, b) {
                    None => {
                        self.bisect_edge(a, b);
                        break;
                    }
                    Some(n) => {
                        let (c, d) = self.longest(n);
                        if edge_key(c, d) == edge_key(a, b) {
                            self.bisect_edge(a, b);
                            break;
                        }
                        cur = n;
                    }
                }
            }
        }
    }

    fn finish(self, template: &Mesh, level: u32) -> Result<Mesh, MeshError> {
        let mut edges: Vec<ConstraintEdge> = self
            .constraint
            .iter()
            .map(|(&(a, b), &(tag, curve))| ConstraintEdge { a, b, tag, curve })
            .collect();
        edges.sort_unstable_by_key(|e| (e.a, e.b));
        let mesh = Mesh {
            vertices: self.vertices,
            tags: self.tags,
            triangles: self.tris,
            edges,
            curves: self.curves,
            corners: template.corners.clone(),
            level,
        };
        mesh.check_invariants()?;
        Ok(mesh)
    }
}

/// Grades the mesh toward the given corner vertices by longest-edge
/// bisection: inside the graded zone every triangle at distance r from a
/// corner ends with diameter at most size_ratio * max(r, radius * q^levels).
pub fn refine_corners(mesh: &Mesh, corners: &[usize], grading: &CornerGrading) -> Result<Mesh, MeshError> {
    if !(grading.q > 0.0 && grading.q < 1.0) {
        return Err(MeshError::InvalidParameter(format!("grading ratio {} is not in (0, 1)", grading.q)));
    }
    if !(grading.radius > 0.0 && grading.size_ratio > 0.0) {
        return Err(MeshError::InvalidParameter("grading radius and size ratio must be positive".into()));
    }
    if let Some(&c) = corners.iter().find(|&&c| c >= mesh.vertices.len()) {
        return Err(MeshError::InvalidParameter(format!("corner {c} is not a mesh vertex")));
    }
    if grading.levels == 0 || corners.is_empty() {
        return Ok(mesh.clone());
    }
    let mut points: Vec<Point> = corners.iter().map(|&c| mesh.vertices[c]).collect();
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    points.dedup();

    let mut w = Work::new(mesh);
    let needs = |w: &Work, t: usize| {
        let pts = w.tris[t].map(|i| w.vertices[i]);
        let diam = pts[0].dist(pts[1]).max(pts[1].dist(pts[2])).max(pts[2].dist(pts[0]));
        if diam <= grading.target(0.0) {
            return false;
        }
        points.iter().any(|&c| {
            let d = point_triangle_distance(c, pts);
            d < grading.radius && diam > grading.target(d)
        })
    };
    let mut check: Vec<usize> = (0..w.tris.len()).collect();
    while !check.is_empty() {
        let before = w.tris.len();
        let marked: Vec<usize> = check.into_iter().filter(|&t| needs(&w, t)).collect();
        let mut touched = vec![false; before];
        for t in marked {
            if touched[t] {
                continue;
            }
            w.lepp_bisect(t);
            for i in w.dirty.drain(..) {
                if i < before {
                    touched[i] = true;
                }
            }
        }
        check = (0..before).filter(|&i| touched[i]).chain(before..w.tris.len()).collect();
    }
    w.finish(mesh, mesh.level)
}

/// Red refinement: every triangle is split into four through its edge
/// midpoints. Constraint midpoints are projected onto the exact curves
/// unless that would invert a neighbouring triangle (see [`snap`]).
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh, MeshError> {
    let constraint: HashMap<(usize, usize), (EdgeTag, usize)> =
        mesh.edges.iter().map(|e| (edge_key(e.a, e.b), (e.tag, e.curve))).collect();
    let mut vertices = mesh.vertices.clone();
    let mut tags = mesh.tags.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut snaps: Vec<(usize, Point)> = Vec::new();
    let mut midpoint = |a: usize, b: usize| -> usize {
        *mid.entry(edge_key(a, b)).or_insert_with(|| {
            let p = vertices[a].midpoint(vertices[b]);
            let mut tag = VertexTag::Interior;
            let m = vertices.len();
            if let Some(&(etag, curve)) = constraint.get(&edge_key(a, b)) {
                snaps.push((m, mesh.curves[curve].project(p)));
                tag = etag.vertex_tag();
            }
            vertices.push(p);
            tags.push(tag);
            m
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
        triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let mut fans: HashMap<usize, Vec<[usize; 3]>> = snaps.iter().map(|&(m, _)| (m, Vec::new())).collect();
    for tri in &triangles {
        for i in tri {
            if let Some(f) = fans.get_mut(i) {
                f.push(*tri);
            }
        }
    }
    for (m, target) in snaps {
        snap(&mut vertices, m, target, &fans[&m]);
    }
    let mut edges = Vec::with_capacity(2 * mesh.edges.len());
    for e in &mesh.edges {
        let m = mid[&edge_key(e.a, e.b)];
        edges.push(ConstraintEdge { a: e.a.min(m), b: e.a.max(m), ..*e });
        edges.push(ConstraintEdge { a: e.b.min(m), b: e.b.max(m), ..*e });
    }
    let out = Mesh {
        vertices,
        tags,
        triangles,
        edges,
        curves: mesh.curves.clone(),
        corners: mesh.corners.clone(),
        level: mesh.level + 1,
    };
    out.check_invariants()?;
    Ok(out)
}
