use condenser_core::geometry::*;
use proptest::prelude::*;

fn assert_sound(spec: &CondenserSpec) {
    let d = validate_spec(spec);
    assert!(d.valid, "{:?}", d.violations);
    assert!(d.clearance > 0.0);
    for c in spec.outer_loops() {
        assert!(c.self_intersections().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn square_mazes_are_valid(m in 3u32..=20) {
        let spec = build_square_maze(m).unwrap();
        assert_sound(&spec);
        let d = validate_spec(&spec);
        prop_assert!((d.clearance - 1.0 / (2.0 * m as f64)).abs() < 1e-12);
        prop_assert!((spec.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circular_mazes_are_valid(m in 3u32..=20) {
        assert_sound(&build_circular_maze(m).unwrap());
    }

    #[test]
    fn spiked_annuli_are_valid(spikes in (3u32..=12).prop_map(|k| 2 * k)) {
        assert_sound(&build_spiked_annulus(SpikedAnnulusParams::with_spikes(spikes)).unwrap());
    }

    #[test]
    fn tangent_disks_are_valid(n in 3u32..=12, rho in 0.2f64..0.6, frac in 0.0f64..0.9) {
        let p = TangentDisksParams { n, rho, cut_radius: 0.0 };
        prop_assume!(rho + p.disk_radius() < 0.95);
        let cut = TangentDisksParams { cut_radius: frac * p.disk_radius(), ..p };
        let whole = build_tangent_disks(p).unwrap();
        let trimmed = build_tangent_disks(cut).unwrap();
        assert_sound(&whole);
        assert_sound(&trimmed);
        // cutting only removes area from K
        let k_area = |s: &CondenserSpec| match &s.compact {
            Compact::Region(loops) => loops.iter().map(|c| c.signed_area().abs()).sum::<f64>(),
            Compact::Curve(_) => unreachable!(),
        };
        prop_assert!(k_area(&trimmed) <= k_area(&whole) + 1e-12);
    }

    #[test]
    fn rotation_preserves_clearance(spikes in (3u32..=8).prop_map(|k| 2 * k), turns in 0u32..16) {
        let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(spikes)).unwrap();
        let rot = spec.rotated(std::f64::consts::TAU * turns as f64 / 16.0);
        prop_assert!((validate_spec(&rot).clearance - validate_spec(&spec).clearance).abs() < 1e-12);
    }
}

#[test]
fn small_parameters_rejected() {
    assert!(build_square_maze(2).is_err());
    assert!(build_circular_maze(2).is_err());
    assert!(build_spiked_annulus(SpikedAnnulusParams::with_spikes(7)).is_err());
    assert!(build_tangent_disks(TangentDisksParams { n: 2, rho: 0.5, cut_radius: 0.0 }).is_err());
    assert!(build_tangent_disks(TangentDisksParams { n: 6, rho: 0.6, cut_radius: 0.3 }).is_err());
}

#[test]
fn spec_json_round_trip() {
    let spec = build_circular_maze(6).unwrap();
    let back = CondenserSpec::from_json(&spec.to_json()).unwrap();
    assert_eq!(back, spec);
}
