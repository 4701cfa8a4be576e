//! Conformal map of a circular-arc triangle onto the upper half-plane.
//!
//! A Möbius map `h(z) = (z + b)/(cz − c)` sends the cusp 1 to ∞ and the two
//! other vertices `v`, `v̄` to ±1, so the triangle becomes the half strip
//! `{−1 < Re ζ < 1, Im ζ > 0}`; `f(ζ) = sin(πζ/2)` opens the strip onto the
//! half-plane.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ArcSegment, ArcTriangle, Point};

/// Distance to the pole below which the image is reported as ∞.
pub const POLE_TOL: f64 = 1e-14;
/// Slack for the triangle membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("degenerate vertex v = {0}: {1}")]
    DegenerateVertex(Complex64, &'static str),
    #[error("point {0} is outside the arc triangle")]
    OutsideTriangle(Complex64),
    #[error("need at least 3 samples per side, got {0}")]
    TooFewSamples(usize),
}

/// A value on the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Extended::Finite(z) => Some(z),
            Extended::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Extended::Infinity
    }

    /// Image under `f(ζ) = sin(πζ/2)`; ∞ stays ∞.
    pub fn strip_map(self) -> Extended {
        match self {
            Extended::Finite(z) => Extended::Finite(strip_map(z)),
            Extended::Infinity => Extended::Infinity,
        }
    }
}

pub fn to_complex(p: Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

/// `h(z) = (z + b)/(cz − c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub b: Complex64,
    pub c: Complex64,
}

impl MoebiusMap {
    pub fn apply(&self, z: Complex64) -> Extended {
        if (z - 1.0).norm() < POLE_TOL {
            return Extended::Infinity;
        }
        Extended::Finite((z + self.b) / (self.c * (z - 1.0)))
    }

    /// h′(z) = −(1 + b) / (c (z − 1)²)
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let d = z - 1.0;
        (d.norm() >= POLE_TOL).then(|| -(1.0 + self.b) / (self.c * d * d))
    }
}

/// Coefficients of the Möbius map with h(1) = ∞, h(v) = 1, h(v̄) = −1.
pub fn moebius_coeffs(v: Complex64) -> Result<MoebiusMap, ConformalError> {
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(ConformalError::DegenerateVertex(v, "not finite"));
    }
    if v.im.abs() <= 1e-14 * v.norm().max(1.0) {
        return Err(ConformalError::DegenerateVertex(v, "v is real"));
    }
    let den = v + v.conj() - 2.0;
    if den.norm() <= 1e-14 {
        return Err(ConformalError::DegenerateVertex(v, "Re v = 1"));
    }
    if v.norm() <= 1.0 {
        return Err(ConformalError::DegenerateVertex(v, "|v| ≤ 1"));
    }
    let vv = v * v.conj();
    Ok(MoebiusMap { b: (v + v.conj() - 2.0 * vv) / den, c: (v - v.conj()) / den })
}

/// `f(ζ) = sin(πζ/2)`, the half strip onto the upper half-plane.
pub fn strip_map(z: Complex64) -> Complex64 {
    (z * FRAC_PI_2).sin()
}

/// f(h(z)) for z in the closed triangle; the cusp maps to ∞.
pub fn map_triangle_to_halfplane(tri: &ArcTriangle, z: Complex64) -> Result<Extended, ConformalError> {
    if !tri.contains(Point::new(z.re, z.im), MEMBERSHIP_TOL) {
        return Err(ConformalError::OutsideTriangle(z));
    }
    let h = moebius_coeffs(to_complex(tri.v))?;
    Ok(h.apply(z).strip_map())
}

/// Finite-difference Cauchy–Riemann residual of f∘h at an interior point:
/// |∂F/∂y − i ∂F/∂x| / |∂F/∂x| with central differences of step `step`.
pub fn cauchy_riemann_residual(tri: &ArcTriangle, z: Complex64, step: f64) -> Result<f64, ConformalError> {
    let h = moebius_coeffs(to_complex(tri.v))?;
    let f = |p: Complex64| h.apply(p).strip_map().finite().ok_or(ConformalError::OutsideTriangle(p));
    let dx = (f(z + step)? - f(z - step)?) / (2.0 * step);
    let i = Complex64::i();
    let dy = (f(z + i * step)? - f(z - i * step)?) / (2.0 * step);
    Ok((dy - i * dx).norm() / dx.norm())
}

/// Deviations of the side images from their targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleMapDiagnostics {
    pub theta: f64,
    pub samples: usize,
    pub b: Complex64,
    pub c: Complex64,
    pub h_v: Complex64,
    pub h_v_conj: Complex64,
    /// Whether the cusp 1 maps to the point at infinity.
    pub cusp_at_infinity: bool,
    /// max |Re h(z) − 1| on S1 (finite images).
    pub s1_deviation: f64,
    /// max |Re h(z) + 1| on S2.
    pub s2_deviation: f64,
    /// max of |Im h(z)| and excess of |Re h(z)| over 1 on S3.
    pub s3_deviation: f64,
    /// Smallest Im h(z) over S1 and S2 (should not be negative).
    pub min_side_imag: f64,
    /// max |Im f(h(z))| on S3.
    pub s3_image_imag: f64,
    /// Smallest |f(h(z))| over S1 and S2 (should be at least 1).
    pub min_side_image_modulus: f64,
}

impl TriangleMapDiagnostics {
    pub fn max_deviation(&self) -> f64 {
        self.s1_deviation.max(self.s2_deviation).max(self.s3_deviation)
    }
}

fn sample(arc: &ArcSegment, n: usize) -> impl Iterator<Item = Complex64> + '_ {
    (0..n).map(move |k| to_complex(arc.point_at(k as f64 / (n - 1) as f64)))
}

/// Samples each side at `samples` evenly spaced points, endpoints included.
pub fn verify_triangle_map(tri: &ArcTriangle, samples: usize) -> Result<TriangleMapDiagnostics, ConformalError> {
    if samples < 3 {
        return Err(ConformalError::TooFewSamples(samples));
    }
    let v = to_complex(tri.v);
    let h = moebius_coeffs(v)?;
    let fin = |e: Extended| e.finite().expect("only the cusp is a pole");
    let mut d = TriangleMapDiagnostics {
        theta: tri.theta,
        samples,
        b: h.b,
        c: h.c,
        h_v: fin(h.apply(v)),
        h_v_conj: fin(h.apply(v.conj())),
        cusp_at_infinity: h.apply(Complex64::new(1.0, 0.0)).is_infinite(),
        s1_deviation: 0.0,
        s2_deviation: 0.0,
        s3_deviation: 0.0,
        min_side_imag: f64::INFINITY,
        s3_image_imag: 0.0,
        min_side_image_modulus: f64::INFINITY,
    };
    for (side, target) in [(&tri.s1, 1.0), (&tri.s2, -1.0)] {
        for z in sample(side, samples) {
            if let Extended::Finite(w) = h.apply(z) {
                let dev = (w.re - target).abs();
                if target > 0.0 {
                    d.s1_deviation = d.s1_deviation.max(dev);
                } else {
                    d.s2_deviation = d.s2_deviation.max(dev);
                }
                d.min_side_imag = d.min_side_imag.min(w.im);
                d.min_side_image_modulus = d.min_side_image_modulus.min(strip_map(w).norm());
            }
        }
    }
    for z in sample(&tri.s3, samples) {
        let w = fin(h.apply(z));
        d.s3_deviation = d.s3_deviation.max(w.im.abs()).max(w.re.abs() - 1.0);
        d.s3_image_imag = d.s3_image_imag.max(strip_map(w).im.abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::arc_triangle;

    #[test]
    fn coefficients_fix_the_vertices() {
        for v in [Complex64::new(1.5, 0.8), Complex64::new(-2.0, 0.3), Complex64::new(0.4, 3.0)] {
            let h = moebius_coeffs(v).unwrap();
            assert!((h.apply(v).finite().unwrap() - 1.0).norm() < 1e-12);
            assert!((h.apply(v.conj()).finite().unwrap() + 1.0).norm() < 1e-12);
            assert!(h.apply(Complex64::new(1.0, 0.0)).is_infinite());
        }
    }

    #[test]
    fn degenerate_vertices_rejected() {
        for v in [Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0), Complex64::new(0.1, 0.2)] {
            assert!(matches!(moebius_coeffs(v), Err(ConformalError::DegenerateVertex(..))));
        }
    }

    #[test]
    fn strip_boundary_goes_to_the_real_axis() {
        for t in [0.1, 1.0, 5.0] {
            let right = strip_map(Complex64::new(1.0, t));
            let left = strip_map(Complex64::new(-1.0, t));
            assert!(right.im.abs() < 1e-12 && right.re >= 1.0);
            assert!(left.im.abs() < 1e-12 && left.re <= -1.0);
            assert!(strip_map(Complex64::new(0.3, t)).im > 0.0);
        }
        assert!((strip_map(Complex64::new(0.5, 0.0)).im).abs() < 1e-15);
    }

    #[test]
    fn sides_map_to_strip_edges() {
        for theta in [PI / 24.0, PI / 12.0, PI / 6.0] {
            let tri = arc_triangle(theta).unwrap();
            let d = verify_triangle_map(&tri, 100).unwrap();
            assert!(d.max_deviation() <= 1e-10, "{theta}: {d:?}");
            assert!(d.s3_image_imag <= 1e-10);
            assert!(d.min_side_imag >= -1e-10);
            assert!(d.min_side_image_modulus >= 1.0 - 1e-10);
            assert!(d.cusp_at_infinity);
        }
    }

    #[test]
    fn three_samples_hit_the_vertices() {
        let tri = arc_triangle(PI / 6.0).unwrap();
        let d = verify_triangle_map(&tri, 3).unwrap();
        assert!((d.h_v - 1.0).norm() < 1e-12 && (d.h_v_conj + 1.0).norm() < 1e-12);
        assert!(matches!(verify_triangle_map(&tri, 2), Err(ConformalError::TooFewSamples(2))));
    }

    #[test]
    fn interior_goes_to_upper_half_plane() {
        for theta in [PI / 24.0, PI / 12.0, PI / 6.0] {
            let tri = arc_triangle(theta).unwrap();
            let g = Complex64::new((1.0 + 2.0 * tri.v.x) / 3.0, 0.0);
            let w = map_triangle_to_halfplane(&tri, g).unwrap().finite().unwrap();
            assert!(w.im > 0.0, "{theta}: {w}");
            assert!(cauchy_riemann_residual(&tri, g, 1e-5).unwrap() <= 1e-6);
        }
        let tri = arc_triangle(PI / 6.0).unwrap();
        assert!(map_triangle_to_halfplane(&tri, Complex64::new(1.0, 0.0)).unwrap().is_infinite());
        assert!(matches!(map_triangle_to_halfplane(&tri, Complex64::new(0.0, 0.0)), Err(ConformalError::OutsideTriangle(_))));
    }
}
