use std::collections::{HashMap, HashSet};

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{edge_key, twice_area, ConstraintEdge, EdgeTag, Mesh, MeshError, Pslg, VertexTag};
use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangulateOptions {
    pub max_area: f64,
    /// Quality bound for Steiner refinement.
    pub min_angle_deg: f64,
    /// Triangles smaller than this are never split for quality.
    pub min_area: f64,
    pub max_steiner: usize,
}

impl TriangulateOptions {
    pub fn with_max_area(max_area: f64) -> Self {
        TriangulateOptions {
            max_area,
            min_angle_deg: 20.0,
            min_area: max_area * 1e-3,
            max_steiner: 4_000_000,
        }
    }
}

/// Constrained Delaunay triangulation of the PSLG refined to the area and
/// angle bounds, restricted to the domain, with wall vertices duplicated so
/// that each side of a slit has its own vertex sheet.
pub fn triangulate(pslg: &Pslg, opts: &TriangulateOptions) -> Result<Mesh, MeshError> {
    let verts: Vec<Point2<f64>> = pslg.points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let cons: Vec<[usize; 2]> = pslg.edges.iter().map(|e| [e.a, e.b]).collect();
    let mut conflict = false;
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::try_bulk_load_cdt(verts, cons, |_| conflict = true)
        .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    if conflict {
        return Err(MeshError::CrossingConstraints);
    }
    if cdt.num_vertices() != pslg.points.len() {
        return Err(MeshError::Triangulation("duplicate input points".into()));
    }
    let params = RefinementParameters::<f64>::new()
        .keep_constraint_edges()
        .with_angle_limit(AngleLimit::from_deg(opts.min_angle_deg))
        .with_max_allowed_area(opts.max_area)
        .with_min_required_area(opts.min_area)
        .with_max_additional_vertices(opts.max_steiner);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(MeshError::Triangulation("Steiner point budget exhausted".into()));
    }

    let vertices: Vec<Point> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            Point::new(p.x, p.y)
        })
        .collect();
    let mut triangles: Vec<[usize; 3]> = cdt
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices();
            [a.fix().index(), b.fix().index(), c.fix().index()]
        })
        .collect();
    for t in triangles.iter_mut() {
        if twice_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }

    let constraint: HashMap<(usize, usize), (EdgeTag, usize)> =
        pslg.edges.iter().map(|e| (edge_key(e.a, e.b), (e.tag, e.curve))).collect();
    let keep = classify(pslg, &vertices, &triangles, &constraint);
    triangles = triangles.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect();

    // drop unused vertices, preserving order
    let mut new_index = vec![usize::MAX; vertices.len()];
    for t in &triangles {
        for &i in t {
            new_index[i] = 0;
        }
    }
    let mut kept_vertices = Vec::new();
    let mut tags = Vec::new();
    for (i, p) in vertices.iter().enumerate() {
        if new_index[i] == 0 {
            new_index[i] = kept_vertices.len();
            kept_vertices.push(*p);
            tags.push(if i < pslg.points.len() { pslg.tags[i] } else { VertexTag::Interior });
        }
    }
    for t in triangles.iter_mut() {
        for i in t.iter_mut() {
            *i = new_index[*i];
        }
    }
    let mut cmap = HashMap::new();
    for (&(a, b), &v) in &constraint {
        if new_index[a] != usize::MAX && new_index[b] != usize::MAX {
            cmap.insert(edge_key(new_index[a], new_index[b]), v);
        }
    }
    let corners = pslg
        .corners
        .iter()
        .filter(|(i, _)| new_index[*i] != usize::MAX)
        .map(|&(i, k)| (new_index[i], k))
        .collect();

    let mut mesh = Mesh {
        vertices: kept_vertices,
        tags,
        triangles,
        edges: Vec::new(),
        curves: pslg.curves.clone(),
        corners,
        level: 0,
    };
    split_walls(&mut mesh, &cmap);
    mesh.check_invariants()?;
    Ok(mesh)
}

/// Marks triangles inside the domain. Triangles are grouped into components
/// connected across non-constraint edges; each component lies entirely on
/// one side of every loop, so one centroid test decides it.
fn classify(
    pslg: &Pslg,
    vertices: &[Point],
    triangles: &[[usize; 3]],
    constraint: &HashMap<(usize, usize), (EdgeTag, usize)>,
) -> Vec<bool> {
    let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            by_edge.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
    }
    let mut comp = vec![usize::MAX; triangles.len()];
    let mut keep = vec![false; triangles.len()];
    let mut ncomp = 0;
    for seed in 0..triangles.len() {
        if comp[seed] != usize::MAX {
            continue;
        }
        let mut stack = vec![seed];
        comp[seed] = ncomp;
        let mut members = Vec::new();
        while let Some(t) = stack.pop() {
            members.push(t);
            let tri = triangles[t];
            for k in 0..3 {
                let e = edge_key(tri[k], tri[(k + 1) % 3]);
                if constraint.get(&e).is_some_and(|(tag, _)| *tag != EdgeTag::Wall) {
                    continue;
                }
                for &n in &by_edge[&e] {
                    if comp[n] == usize::MAX {
                        comp[n] = ncomp;
                        stack.push(n);
                    }
                }
            }
        }
        let area = |t: usize| {
            let [a, b, c] = triangles[t];
            twice_area(vertices[a], vertices[b], vertices[c])
        };
        let rep = *members.iter().max_by(|&&x, &&y| area(x).total_cmp(&area(y))).unwrap();
        let [a, b, c] = triangles[rep];
        let centroid = (vertices[a] + vertices[b] + vertices[c]) * (1.0 / 3.0);
        let inside = pslg.in_domain(centroid);
        for t in members {
            keep[t] = inside;
        }
        ncomp += 1;
    }
    keep
}

/// Gives each side of every wall its own copy of the wall vertices and
/// rebuilds the constraint edge list from the triangles.
fn split_walls(mesh: &mut Mesh, cmap: &HashMap<(usize, usize), (EdgeTag, usize)>) {
    let wall: HashSet<(usize, usize)> = cmap
        .iter()
        .filter(|(_, (tag, _))| *tag == EdgeTag::Wall)
        .map(|(e, _)| *e)
        .collect();
    let n0 = mesh.vertices.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n0];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &i in tri {
            incident[i].push(t);
        }
    }
    let mut on_wall = vec![false; n0];
    for &(a, b) in &wall {
        on_wall[a] = true;
        on_wall[b] = true;
    }
    let mut origin: Vec<usize> = (0..n0).collect();
    for v in 0..n0 {
        if !on_wall[v] {
            continue;
        }
        let fan = incident[v].clone();
        // union-find over the fan, joined across non-wall edges through v
        let mut parent: Vec<usize> = (0..fan.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut by_neighbor: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, &t) in fan.iter().enumerate() {
            for &w in &mesh.triangles[t] {
                if w != v {
                    by_neighbor.entry(w).or_default().push(k);
                }
            }
        }
        let mut neighbors: Vec<_> = by_neighbor.into_iter().collect();
        neighbors.sort_unstable_by_key(|(w, _)| *w);
        for (w, ks) in neighbors {
            if ks.len() == 2 && !wall.contains(&edge_key(origin[v], origin[w])) {
                let (a, b) = (find(&mut parent, ks[0]), find(&mut parent, ks[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut roots: Vec<usize> = (0..fan.len()).map(|k| find(&mut parent, k)).collect();
        let mut groups = roots.clone();
        groups.sort_unstable();
        groups.dedup();
        for &g in groups.iter().skip(1) {
            let copy = mesh.vertices.len();
            mesh.vertices.push(mesh.vertices[v]);
            mesh.tags.push(mesh.tags[v]);
            origin.push(v);
            if let Some(&(_, kind)) = mesh.corners.iter().find(|(i, _)| *i == v) {
                mesh.corners.push((copy, kind));
            }
            for (k, r) in roots.iter_mut().enumerate() {
                if *r == g {
                    let t = fan[k];
                    for i in mesh.triangles[t].iter_mut() {
                        if *i == v {
                            *i = copy;
                        }
                    }
                }
            }
        }
    }

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for tri in &mesh.triangles {
        for k in 0..3 {
            let (x, y) = (tri[k], tri[(k + 1) % 3]);
            if let Some(&(tag, curve)) = cmap.get(&edge_key(origin[x], origin[y])) {
                if seen.insert(edge_key(x, y)) {
                    let (a, b) = if x < y { (x, y) } else { (y, x) };
                    edges.push(ConstraintEdge { a, b, tag, curve });
                }
            }
        }
    }
    mesh.edges = edges;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks, ArcSegment, Chain, Compact,
        CondenserSpec, Family, FamilyParams, SpikedAnnulusParams, TangentDisksParams,
    };
    use crate::mesh::{discretize_boundary, CornerKind};

    fn mesh_of(spec: &CondenserSpec, tol: f64, area: f64) -> Mesh {
        let p = discretize_boundary(spec, tol).unwrap();
        triangulate(&p, &TriangulateOptions::with_max_area(area)).unwrap()
    }

    #[test]
    fn unit_square() {
        let spec = CondenserSpec::new(
            Family::Custom,
            FamilyParams::default(),
            vec![Chain::polygon(&[
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ])],
            Compact::Region(vec![Chain::closed(vec![ArcSegment::full_circle(Point::new(0.5, 0.5), 0.1)])]),
        );
        let m = mesh_of(&spec, 0.01, 0.5);
        assert!(m.num_triangles() >= 2);
        assert!(m.triangles.iter().enumerate().all(|(t, _)| m.triangle_area(t) <= 0.5));
    }

    #[test]
    fn square_maze_topology() {
        let spec = build_square_maze(7).unwrap();
        let m = mesh_of(&spec, 1e-3, 2e-3);
        // every spike tip is a vertex
        for w in spec.walls() {
            let tip = w.segments[0].end();
            assert!(m.vertices.contains(&tip));
        }
        // walls are attached to the square, so Ω is simply connected
        assert_eq!(m.boundary_components(), 1);
        assert_eq!(m.euler_characteristic(), 1);
        let area = m.total_area();
        assert!((area - 1.0).abs() < 1e-12, "{area}");
        assert!(m.corners.iter().filter(|c| c.1 == CornerKind::WallEnd).count() >= 12);
    }

    #[test]
    fn circular_maze_free_spiral_is_a_hole() {
        let spec = build_circular_maze(5).unwrap();
        let m = mesh_of(&spec, 1e-3, 2e-3);
        assert_eq!(m.boundary_components(), 2);
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.max_curve_deviation() < 1e-12);
    }

    #[test]
    fn annulus_and_disks() {
        let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(10)).unwrap();
        let m = mesh_of(&spec, 1e-3, 5e-3);
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.vertices.iter().all(|p| p.norm() > 0.25 - 1e-9));
        let spec = build_tangent_disks(TangentDisksParams::default_configuration()).unwrap();
        let m = mesh_of(&spec, 1e-3, 5e-3);
        for (t, _) in m.triangles.iter().enumerate() {
            let [a, b, c] = m.triangle_points(t);
            let g = (a + b + c) * (1.0 / 3.0);
            assert!(spec.compact.chains().iter().all(|l| l.winding_number(g) == 0));
        }
    }
}
