use serde::{Deserialize, Serialize};

use super::{EdgeTag, MeshError, VertexTag};
use crate::geometry::{validate_spec, ArcSegment, Chain, Compact, CondenserSpec, Point};

/// Anchors closer than this are merged into one vertex.
const MERGE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerKind {
    /// Endpoint of a wall (slit).
    WallEnd,
    /// Non-smooth junction inside a wall.
    WallKink,
    /// Endpoint of a compact curve.
    CompactEnd,
    /// Non-smooth junction of a compact curve or region loop.
    CompactKink,
    /// Point shared by two compact loops (tangency).
    Cusp,
    /// Reentrant corner of a boundary loop.
    ReflexOuter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    Outer,
    Compact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PslgEdge {
    pub a: usize,
    pub b: usize,
    pub tag: EdgeTag,
    pub curve: usize,
}

/// Planar straight-line graph of a condenser.
#[derive(Clone, Debug, PartialEq)]
pub struct Pslg {
    pub points: Vec<Point>,
    pub tags: Vec<VertexTag>,
    pub edges: Vec<PslgEdge>,
    /// Exact curves the edges approximate.
    pub curves: Vec<ArcSegment>,
    /// Closed polylines bounding area (outer loops and compact regions).
    pub loops: Vec<(LoopKind, Vec<usize>)>,
    /// Seed points in excluded regions enclosed by the outer boundary.
    pub holes: Vec<Point>,
    pub corners: Vec<(usize, CornerKind)>,
    pub chord_tol: f64,
    pub clearance: f64,
}

/// Crossing-number point-in-polygon test.
fn polygon_contains(points: &[Point], lp: &[usize], p: Point) -> bool {
    let mut inside = false;
    let n = lp.len();
    for i in 0..n {
        let a = points[lp[i]];
        let b = points[lp[(i + 1) % n]];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl Pslg {
    /// Inside test against the discrete loops: inside an odd number of outer
    /// loops and outside every compact region.
    pub fn in_domain(&self, p: Point) -> bool {
        let mut outer = 0;
        for (kind, lp) in &self.loops {
            let inside = polygon_contains(&self.points, lp, p);
            match kind {
                LoopKind::Outer if inside => outer += 1,
                LoopKind::Compact if inside => return false,
                _ => {}
            }
        }
        outer % 2 == 1
    }

    fn in_bounding_loop(&self, p: Point) -> bool {
        self.loops
            .iter()
            .any(|(k, lp)| *k == LoopKind::Outer && polygon_contains(&self.points, lp, p))
    }
}

struct Builder {
    points: Vec<Point>,
    tags: Vec<VertexTag>,
    anchors: Vec<usize>,
}

impl Builder {
    fn anchor(&mut self, p: Point, tag: VertexTag) -> Result<usize, MeshError> {
        if let Some(&i) = self.anchors.iter().find(|&&i| self.points[i].dist(p) <= MERGE_TOL) {
            if self.tags[i] != tag {
                return Err(MeshError::InvalidSpec("compact set touches the boundary".into()));
            }
            return Ok(i);
        }
        let i = self.push(p, tag);
        self.anchors.push(i);
        Ok(i)
    }

    fn push(&mut self, p: Point, tag: VertexTag) -> usize {
        self.points.push(p);
        self.tags.push(tag);
        self.points.len() - 1
    }
}

/// Discretizes with the default edge length (no cap beyond the chord
/// tolerance).
pub fn discretize_boundary(spec: &CondenserSpec, chord_tol: f64) -> Result<Pslg, MeshError> {
    discretize_boundary_with(spec, chord_tol, None)
}

/// Replaces every primitive by a polyline with sagitta at most `chord_tol`
/// and edges no longer than `max_edge`. Chain endpoints lying inside another
/// primitive split it, so attachment points become shared vertices.
pub fn discretize_boundary_with(spec: &CondenserSpec, chord_tol: f64, max_edge: Option<f64>) -> Result<Pslg, MeshError> {
    let diag = validate_spec(spec);
    if !diag.valid {
        let names: Vec<String> = diag.violations.iter().map(|v| v.to_string()).collect();
        return Err(MeshError::InvalidSpec(names.join("; ")));
    }
    if !(chord_tol > 0.0) || chord_tol > 0.5 * diag.clearance {
        return Err(MeshError::ChordTooCoarse {
            chord_tol,
            clearance: diag.clearance,
        });
    }

    let mut chains: Vec<(&Chain, EdgeTag, bool)> = Vec::new();
    for c in &spec.outer {
        chains.push((c, if c.closed { EdgeTag::Outer } else { EdgeTag::Wall }, c.closed));
    }
    match &spec.compact {
        Compact::Curve(c) => chains.push((c, EdgeTag::Compact, false)),
        Compact::Region(loops) => chains.extend(loops.iter().map(|c| (c, EdgeTag::Compact, true))),
    }
    let endpoints: Vec<Point> = chains
        .iter()
        .flat_map(|(c, _, _)| c.segments.iter().flat_map(|s| [s.start(), s.end()]))
        .collect();

    let mut b = Builder {
        points: Vec::new(),
        tags: Vec::new(),
        anchors: Vec::new(),
    };
    let mut edges = Vec::new();
    let mut curves = Vec::new();
    let mut loops = Vec::new();
    let mut corners: Vec<(usize, CornerKind)> = Vec::new();
    let mut loop_membership: Vec<Vec<usize>> = Vec::new();

    for (ci, &(chain, tag, is_loop)) in chains.iter().enumerate() {
        let vtag = tag.vertex_tag();
        let mut poly: Vec<usize> = Vec::new();
        for seg in &chain.segments {
            let mut cuts: Vec<f64> = endpoints
                .iter()
                .filter_map(|&p| seg.param_of(p, MERGE_TOL))
                .filter(|&t| t > 1e-9 && t < 1.0 - 1e-9)
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
            let mut bounds = vec![0.0];
            bounds.extend(cuts);
            bounds.push(1.0);
            for w in bounds.windows(2) {
                let piece = seg.sub(w[0], w[1]);
                let curve = curves.len();
                curves.push(piece);
                let n = piece.pieces_for(chord_tol, max_edge);
                let first = b.anchor(piece.start(), vtag)?;
                let last = b.anchor(piece.end(), vtag)?;
                let mut prev = first;
                if poly.last() != Some(&first) {
                    poly.push(first);
                }
                for k in 1..=n {
                    let idx = if k == n { last } else { b.push(piece.point_at(k as f64 / n as f64), vtag) };
                    edges.push(PslgEdge {
                        a: prev,
                        b: idx,
                        tag,
                        curve,
                    });
                    prev = idx;
                    poly.push(idx);
                }
            }
        }
        if is_loop {
            if poly.len() > 1 && poly.first() == poly.last() {
                poly.pop();
            }
            let kind = if tag == EdgeTag::Compact { LoopKind::Compact } else { LoopKind::Outer };
            if kind == LoopKind::Compact {
                for &i in &poly {
                    if loop_membership.len() <= i {
                        loop_membership.resize(i + 1, Vec::new());
                    }
                    if !loop_membership[i].contains(&ci) {
                        loop_membership[i].push(ci);
                    }
                }
            }
            loops.push((kind, poly));
        }

        // corners of this chain
        let segs = &chain.segments;
        if !chain.closed {
            let kind = if tag == EdgeTag::Compact { CornerKind::CompactEnd } else { CornerKind::WallEnd };
            corners.push((b.anchor(segs[0].start(), vtag)?, kind));
            corners.push((b.anchor(segs[segs.len() - 1].end(), vtag)?, kind));
        }
        let n = segs.len();
        let junctions = if chain.closed { n } else { n - 1 };
        for j in 0..junctions {
            let (s0, s1) = (&segs[j], &segs[(j + 1) % n]);
            let t0 = s0.tangent_at(1.0);
            let t1 = s1.tangent_at(0.0);
            if t0.cross(t1).abs() < 1e-9 && t0.dot(t1) > 0.0 {
                continue;
            }
            let p = s1.start();
            let idx = b.anchor(p, vtag)?;
            let kind = match tag {
                EdgeTag::Wall => CornerKind::WallKink,
                EdgeTag::Compact => CornerKind::CompactKink,
                EdgeTag::Outer => {
                    let probe = p + (t1 - t0) * (1e-7 / (t1 - t0).norm().max(1e-300));
                    if spec.contains(probe) {
                        continue;
                    }
                    CornerKind::ReflexOuter
                }
            };
            corners.push((idx, kind));
        }
    }
    for (i, m) in loop_membership.iter().enumerate() {
        if m.len() > 1 {
            corners.push((i, CornerKind::Cusp));
        }
    }
    let mut seen = std::collections::HashSet::new();
    corners.retain(|(i, _)| seen.insert(*i));

    let mut pslg = Pslg {
        points: b.points,
        tags: b.tags,
        edges,
        curves,
        loops,
        holes: Vec::new(),
        corners,
        chord_tol,
        clearance: diag.clearance,
    };
    let mut holes = Vec::new();
    for (_, lp) in &pslg.loops {
        let (p, q) = (pslg.points[lp[0]], pslg.points[lp[1]]);
        let m = p.midpoint(q);
        let nrm = (q - p).perp() * (1e-3 / p.dist(q).max(1e-300) * p.dist(q).min(pslg.clearance));
        for cand in [m + nrm, m - nrm] {
            if !pslg.in_domain(cand) && pslg.in_bounding_loop(cand) {
                holes.push(cand);
            }
        }
    }
    pslg.holes = holes;
    Ok(pslg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks, SpikedAnnulusParams,
        TangentDisksParams,
    };

    #[test]
    fn square_maze_points_independent_of_tolerance() {
        let spec = build_square_maze(7).unwrap();
        let a = discretize_boundary(&spec, 1e-2).unwrap();
        let b = discretize_boundary(&spec, 1e-5).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        let ends = a.corners.iter().filter(|c| c.1 == CornerKind::WallEnd).count();
        assert_eq!(ends, 12);
        // attachment points split the square's sides
        let left_side_vertices = a.points.iter().filter(|p| p.x == 0.0).count();
        assert_eq!(left_side_vertices, 2 + 3);
        assert!(a.in_domain(Point::new(0.5, 0.5 / 7.0)));
        assert!(!a.in_domain(Point::new(1.5, 0.5)));
    }

    #[test]
    fn arcs_within_chord_tolerance() {
        let spec = build_circular_maze(5).unwrap();
        let tol = 1e-3;
        let p = discretize_boundary(&spec, tol).unwrap();
        for e in &p.edges {
            let c = &p.curves[e.curve];
            assert!(c.distance(p.points[e.a]) < 1e-12);
            let mid = p.points[e.a].midpoint(p.points[e.b]);
            assert!(c.distance(mid) <= tol * (1.0 + 1e-9));
        }
        assert!(discretize_boundary(&spec, 0.06).is_err());
    }

    #[test]
    fn annulus_hole_and_corners() {
        let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(10)).unwrap();
        let p = discretize_boundary(&spec, 1e-3).unwrap();
        assert_eq!(p.loops.len(), 2);
        assert_eq!(p.holes.len(), 1);
        assert!(p.holes[0].norm() < 0.25);
        assert_eq!(p.corners.iter().filter(|c| c.1 == CornerKind::WallEnd).count(), 20);
    }

    #[test]
    fn tangent_disks_loops_and_cusps() {
        let spec = build_tangent_disks(TangentDisksParams::default_configuration()).unwrap();
        let p = discretize_boundary(&spec, 1e-3).unwrap();
        assert_eq!(p.loops.iter().filter(|l| l.0 == LoopKind::Compact).count(), 6);
        assert_eq!(p.corners.iter().filter(|c| c.1 == CornerKind::Cusp).count(), 6);
        // one hole seed inside each disk
        assert_eq!(p.holes.len(), 6);
        let cut = build_tangent_disks(TangentDisksParams {
            cut_radius: 0.05,
            ..TangentDisksParams::default_configuration()
        })
        .unwrap();
        let p = discretize_boundary(&cut, 1e-3).unwrap();
        for (_, lp) in &p.loops {
            assert!(lp.len() >= 3);
        }
        assert_eq!(p.corners.iter().filter(|c| c.1 == CornerKind::CompactKink).count(), 24);
    }
}
