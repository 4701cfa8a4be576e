use std::f64::consts::{PI, TAU};

use condenser_core::fem::*;
use condenser_core::geometry::*;
use condenser_core::mesh::*;
use condenser_core::Execution;
use proptest::prelude::*;

/// Unit square on a 3×3 grid, u = 1 on the left side and 0 on the right,
/// natural conditions on top and bottom.
fn unit_square() -> Mesh {
    let mut vertices = Vec::new();
    let mut tags = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            vertices.push(Point::new(i as f64 / 2.0, j as f64 / 2.0));
            tags.push(match i {
                0 => VertexTag::Compact,
                2 => VertexTag::Outer,
                _ => VertexTag::Interior,
            });
        }
    }
    let mut triangles = Vec::new();
    for j in 0..2 {
        for i in 0..2 {
            let a = 3 * j + i;
            triangles.push([a, a + 1, a + 4]);
            triangles.push([a, a + 4, a + 3]);
        }
    }
    let curves = vec![
        ArcSegment::segment(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
        ArcSegment::segment(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
    ];
    let edges = vec![
        ConstraintEdge { a: 0, b: 3, tag: EdgeTag::Compact, curve: 0 },
        ConstraintEdge { a: 3, b: 6, tag: EdgeTag::Compact, curve: 0 },
        ConstraintEdge { a: 2, b: 5, tag: EdgeTag::Outer, curve: 1 },
        ConstraintEdge { a: 5, b: 8, tag: EdgeTag::Outer, curve: 1 },
    ];
    Mesh { vertices, tags, triangles, edges, curves, corners: vec![], level: 0 }
}

fn coarse(spec: &CondenserSpec) -> Mesh {
    let cl = validate_spec(spec).clearance;
    let pslg = discretize_boundary(spec, cl / 20.0).unwrap();
    triangulate(&pslg, &TriangulateOptions::with_max_area(cl * cl)).unwrap()
}

#[test]
fn linear_potential_is_exact() {
    let mesh = unit_square();
    for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
        let system = assemble(&mesh, order).unwrap();
        let field = solve(&mesh, &system, &SolveOptions::default()).unwrap();
        assert!((energy(&field) - 1.0).abs() < 1e-13, "{order:?}");
        for (p, u) in field.dofs.points.iter().zip(&field.values) {
            assert!((u - (1.0 - p.x)).abs() < 1e-13);
        }
    }
}

#[test]
fn floating_component_is_singular() {
    let mut mesh = unit_square();
    let n = mesh.vertices.len();
    mesh.vertices.extend([Point::new(3.0, 0.0), Point::new(4.0, 0.0), Point::new(3.0, 1.0)]);
    mesh.tags.extend([VertexTag::Interior; 3]);
    mesh.triangles.push([n, n + 1, n + 2]);
    assert!(matches!(assemble(&mesh, ElementOrder::Linear), Err(FemError::Singular(_))));
    for t in mesh.tags.iter_mut() {
        *t = VertexTag::Interior;
    }
    mesh.edges.clear();
    assert!(matches!(assemble(&mesh, ElementOrder::Quadratic), Err(FemError::Singular(_))));
}

#[test]
fn stiffness_is_symmetric_with_zero_row_sums() {
    let mesh = coarse(&build_circular_maze(4).unwrap());
    for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
        let s = assemble(&mesh, order).unwrap();
        let scale = s.full.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(s.full.symmetry_defect() <= 1e-14 * scale);
        assert!(s.full.row_sums().iter().all(|r| r.abs() <= 1e-12 * scale));
        assert!(s.full.diagonal().iter().all(|&d| d > 0.0));
    }
}

#[test]
fn energy_decreases_under_nested_refinement() {
    // straight walls only, so refined spaces contain the coarse ones
    let spec = build_square_maze(4).unwrap();
    for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
        let opts = CapacityOptions { order, levels: 3, target_rel_err: 0.0, ..Default::default() };
        let r = capacity(&spec, &opts).unwrap();
        assert_eq!(r.levels.len(), 4);
        for w in r.levels.windows(2) {
            assert!(w[1].value <= w[0].value * (1.0 + 1e-12), "{order:?}: {} > {}", w[1].value, w[0].value);
        }
    }
}

#[test]
fn linear_elements_keep_the_maximum_principle() {
    let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(8)).unwrap();
    let opts = CapacityOptions { order: ElementOrder::Linear, levels: 1, target_rel_err: 0.0, ..Default::default() };
    for l in capacity(&spec, &opts).unwrap().levels {
        assert!(l.min_potential >= -1e-8 && l.max_potential <= 1.0 + 1e-8, "{l:?}");
    }
}

#[test]
fn quadrature_agrees_with_matrix_energy() {
    let spec = build_circular_maze(5).unwrap();
    let opts = CapacityOptions { levels: 1, target_rel_err: 0.0, ..Default::default() };
    for l in capacity(&spec, &opts).unwrap().levels {
        assert!((l.value - l.matrix_energy).abs() <= 1e-10 * l.value, "{l:?}");
    }
}

#[test]
fn annulus_capacity() {
    let spec = concentric_annulus(0.25, 1.0).unwrap();
    let opts = CapacityOptions { chord_tol: Some(1e-3), target_rel_err: 0.0, ..Default::default() };
    let r = capacity(&spec, &opts).unwrap();
    let exact = TAU / 4f64.ln();
    assert!((r.value - exact).abs() <= 5e-4 * exact, "{} vs {exact}", r.value);
}

#[test]
fn coarse_solve_reaches_residual_target() {
    let spec = build_square_maze(7).unwrap();
    let opts = CapacityOptions { levels: 0, ..Default::default() };
    let r = capacity(&spec, &opts).unwrap();
    assert!(r.levels[0].solver.rel_residual <= 1e-12);
    assert!(!r.converged && r.est_rel_error.is_infinite());
}

#[test]
fn results_are_deterministic() {
    let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(6)).unwrap();
    let par = CapacityOptions { levels: 1, ..Default::default() };
    let mut seq = par;
    seq.solver.exec = Execution::Sequential;
    let a = capacity(&spec, &par).unwrap();
    let b = capacity(&spec, &par).unwrap();
    let c = capacity(&spec, &seq).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.value.to_bits(), c.value.to_bits());
    assert_eq!(a.levels, c.levels);
}

#[test]
fn rotation_by_a_spike_period() {
    let spikes = 6;
    let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(spikes)).unwrap();
    let turned = spec.rotated(TAU / spikes as f64);
    let opts = CapacityOptions { levels: 2, target_rel_err: 0.0, ..Default::default() };
    let a = capacity(&spec, &opts).unwrap();
    let b = capacity(&turned, &opts).unwrap();
    let tol = 2.0 * a.est_rel_error.max(b.est_rel_error);
    assert!((a.value - b.value).abs() <= tol * a.value, "{} vs {}", a.value, b.value);
}

#[test]
fn invalid_input_is_reported() {
    let mut spec = build_square_maze(3).unwrap();
    spec.outer[0] = spec.outer[0].rotated(PI / 7.0);
    let e = capacity(&spec, &CapacityOptions::default()).unwrap_err();
    assert!(e.is_input_error(), "{e}");
    let spec = build_square_maze(3).unwrap();
    let opts = CapacityOptions { max_area: Some(-1.0), ..Default::default() };
    assert!(matches!(capacity(&spec, &opts), Err(FemError::InvalidParameter(_))));
}

proptest! {
    #[test]
    fn element_matrices_annihilate_constants(
        x in prop::array::uniform6(-2.0f64..2.0),
    ) {
        let pts = [Point::new(x[0], x[1]), Point::new(x[2], x[3]), Point::new(x[4], x[5])];
        let area2 = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
        prop_assume!(area2 > 1e-3);
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let k = element_stiffness(order, pts).unwrap();
            let n = order.local_dofs();
            let scale = (0..n).map(|i| k[6 * i + i]).fold(0.0f64, f64::max);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| k[6 * i + j]).sum();
                prop_assert!(row.abs() <= 1e-10 * scale);
                for j in 0..n {
                    prop_assert!((k[6 * i + j] - k[6 * j + i]).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}
