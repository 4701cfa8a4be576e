use num_complex::Complex64;
use std::f64::consts::FRAC_PI_6;

use condenser_core::conformal::*;
use condenser_core::geometry::{arc_triangle, Point};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { max_global_rejects: 1 << 16, ..ProptestConfig::default() })]

    #[test]
    fn interior_lands_in_the_upper_half_plane(
        theta in 0.05f64..FRAC_PI_6,
        x in 1.0f64..3.0,
        y in -1.0f64..1.0,
    ) {
        let tri = arc_triangle(theta).unwrap();
        let z = Point::new(x, y);
        // keep away from the boundary so the difference quotients stay inside
        prop_assume!(tri.contains(z, -1e-3));
        let w = map_triangle_to_halfplane(&tri, to_complex(z)).unwrap().finite().unwrap();
        prop_assert!(w.im > 0.0);
        prop_assert!(cauchy_riemann_residual(&tri, to_complex(z), 1e-5).unwrap() < 1e-5);
    }

    #[test]
    fn symmetry_line_maps_to_the_imaginary_axis(theta in 0.05f64..FRAC_PI_6, t in 0.01f64..0.99) {
        let tri = arc_triangle(theta).unwrap();
        let far = tri.w.x + tri.base_radius();
        let z = Complex64::new(1.0 + t * (far - 1.0), 0.0);
        let w = map_triangle_to_halfplane(&tri, z).unwrap().finite().unwrap();
        prop_assert!(w.re.abs() < 1e-9 * w.norm().max(1.0));
        prop_assert!(w.im > 0.0);
    }
}

#[test]
fn outside_points_are_refused() {
    let tri = arc_triangle(FRAC_PI_6).unwrap();
    assert!(map_triangle_to_halfplane(&tri, Complex64::new(5.0, 0.0)).is_err());
    assert!(map_triangle_to_halfplane(&tri, Complex64::new(1.0, 0.3)).is_err());
}
