use std::fmt;

use serde::Serialize;

use super::{Chain, CondenserSpec, GeometryError, Point, COINCIDENCE_TOL};

/// Distance from an interior point to `∂Ω`.
pub fn distance_to_boundary(spec: &CondenserSpec, p: Point) -> Result<f64, GeometryError> {
    if !spec.contains(p) {
        return Err(GeometryError::OutsideDomain { x: p.x, y: p.y });
    }
    Ok(spec.boundary_distance_unchecked(p))
}

/// A named defect found by [`validate_spec`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    InvalidPrimitive { chain: String, message: String },
    BrokenChain { chain: String, defect: f64 },
    SelfIntersection { chain: String, first: usize, second: usize },
    CompactTouchesBoundary { compact_piece: usize, outer_chain: usize, outer_piece: usize },
    CompactOutsideDomain,
    CrossingBoundary { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidPrimitive { chain, message } => write!(f, "{chain}: {message}"),
            Violation::BrokenChain { chain, defect } => write!(f, "{chain}: junction gap {defect:e}"),
            Violation::SelfIntersection { chain, first, second } => {
                write!(f, "{chain}: pieces {first} and {second} intersect")
            }
            Violation::CompactTouchesBoundary {
                compact_piece,
                outer_chain,
                outer_piece,
            } => write!(
                f,
                "compact piece {compact_piece} touches boundary chain {outer_chain} piece {outer_piece}"
            ),
            Violation::CompactOutsideDomain => write!(f, "compact set is not inside the domain"),
            Violation::CrossingBoundary { first, second } => {
                write!(f, "boundary chains {first} and {second} cross")
            }
        }
    }
}

/// Result of [`validate_spec`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub valid: bool,
    /// `d(K, ∂Ω)`, zero if they meet.
    pub clearance: f64,
    pub max_junction_defect: f64,
    pub violations: Vec<Violation>,
}

fn chain_checks(name: String, c: &Chain, out: &mut Vec<Violation>) -> f64 {
    for s in &c.segments {
        if let Err(e) = s.check() {
            out.push(Violation::InvalidPrimitive {
                chain: name.clone(),
                message: e.to_string(),
            });
        }
    }
    let defect = c.junction_defect();
    if defect > COINCIDENCE_TOL {
        out.push(Violation::BrokenChain {
            chain: name.clone(),
            defect,
        });
    }
    for (first, second) in c.self_intersections() {
        out.push(Violation::SelfIntersection {
            chain: name.clone(),
            first,
            second,
        });
    }
    defect
}

/// Checks chain closure, self-intersections, mutual crossings of boundary
/// chains, and that `K` lies inside `Ω` at positive distance from `∂Ω`.
pub fn validate_spec(spec: &CondenserSpec) -> Diagnostics {
    let mut violations = Vec::new();
    let mut max_defect: f64 = 0.0;
    for (i, c) in spec.outer.iter().enumerate() {
        max_defect = max_defect.max(chain_checks(format!("outer[{i}]"), c, &mut violations));
    }
    let compact = spec.compact.chains();
    for (i, c) in compact.iter().enumerate() {
        max_defect = max_defect.max(chain_checks(format!("compact[{i}]"), c, &mut violations));
    }

    // boundary chains may touch (walls attach to loops) but not cross
    for i in 0..spec.outer.len() {
        for j in i + 1..spec.outer.len() {
            if chains_cross(&spec.outer[i], &spec.outer[j]) {
                violations.push(Violation::CrossingBoundary { first: i, second: j });
            }
        }
    }

    let mut clearance = f64::INFINITY;
    let pieces = compact.iter().flat_map(|c| c.segments.iter());
    for (k, piece) in pieces.enumerate() {
        for (ci, oc) in spec.outer.iter().enumerate() {
            for (pi, op) in oc.segments.iter().enumerate() {
                let d = piece.distance_to(op);
                if d <= COINCIDENCE_TOL {
                    violations.push(Violation::CompactTouchesBoundary {
                        compact_piece: k,
                        outer_chain: ci,
                        outer_piece: pi,
                    });
                }
                clearance = clearance.min(d);
            }
        }
    }
    let probe = compact.first().and_then(|c| c.segments.first()).map(|s| s.point_at(0.5));
    if clearance > COINCIDENCE_TOL && !probe.is_some_and(|p| spec.contains(p)) {
        violations.push(Violation::CompactOutsideDomain);
    }
    if !clearance.is_finite() {
        clearance = 0.0;
    }
    Diagnostics {
        valid: violations.is_empty(),
        clearance,
        max_junction_defect: max_defect,
        violations,
    }
}

/// True if the chains share a point that is not an endpoint of an open chain
/// touching the other.
fn chains_cross(a: &Chain, b: &Chain) -> bool {
    let ends: Vec<Point> = [a, b]
        .iter()
        .filter(|c| !c.closed)
        .flat_map(|c| [c.start(), c.end()])
        .flatten()
        .collect();
    for sa in &a.segments {
        for sb in &b.segments {
            for q in sa.intersections(sb) {
                if ends.iter().all(|e| e.dist(q) > 1e-10) {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks, ArcSegment, Compact,
        Family, FamilyParams, SpikedAnnulusParams, TangentDisksParams,
    };
    use approx::assert_relative_eq;

    fn unit_disk() -> CondenserSpec {
        CondenserSpec::new(
            Family::Custom,
            FamilyParams::default(),
            vec![Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, 1.0)])],
            Compact::Region(vec![Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, 0.5)])]),
        )
    }

    #[test]
    fn square_maze_is_valid_with_exact_clearance() {
        let d = validate_spec(&build_square_maze(7).unwrap());
        assert!(d.valid, "{:?}", d.violations);
        assert_relative_eq!(d.clearance, 1.0 / 14.0, epsilon = 1e-15);
    }

    #[test]
    fn circular_maze_clearance() {
        let d = validate_spec(&build_circular_maze(5).unwrap());
        assert!(d.valid, "{:?}", d.violations);
        assert!((d.clearance - 0.1).abs() / 0.1 < 0.02, "{}", d.clearance);
    }

    #[test]
    fn other_families_valid() {
        for m in [10, 16, 24] {
            let d = validate_spec(&build_spiked_annulus(SpikedAnnulusParams::with_spikes(m)).unwrap());
            assert!(d.valid, "{:?}", d.violations);
        }
        let d = validate_spec(&build_tangent_disks(TangentDisksParams::default_configuration()).unwrap());
        assert!(d.valid, "{:?}", d.violations);
        assert_relative_eq!(d.clearance, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn compact_touching_wall_is_named() {
        let mut spec = build_square_maze(3).unwrap();
        let Compact::Curve(chain) = &mut spec.compact else { panic!() };
        chain.segments.insert(0, ArcSegment::segment(Point::new(1.0 / 6.0, 0.0), Point::new(1.0 / 6.0, 1.0 / 6.0)));
        let d = validate_spec(&spec);
        assert!(!d.valid);
        assert_eq!(d.clearance, 0.0);
        assert!(d.violations.iter().any(|v| matches!(v, Violation::CompactTouchesBoundary { .. })));
        assert!(d.violations[0].to_string().contains("touches"));
    }

    #[test]
    fn distances() {
        let spec = build_square_maze(7).unwrap();
        let p = Point::new(0.5, 1.0 / 14.0);
        assert_relative_eq!(distance_to_boundary(&spec, p).unwrap(), 1.0 / 14.0, epsilon = 1e-15);
        assert!(distance_to_boundary(&spec, Point::new(1.5, 0.5)).is_err());
        assert!(distance_to_boundary(&spec, Point::new(0.5, 1.0 / 7.0)).is_err());
        assert_eq!(distance_to_boundary(&unit_disk(), Point::ORIGIN).unwrap(), 1.0);
    }
}
