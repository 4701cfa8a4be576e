use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};

use super::{ArcSegment, GeometryError, Point};

/// Circular-arc triangle with a cusp at 1 and vertices `v`, `conj(v)`.
///
/// `s1` is the arc of the circle `S(u, Im u)` from 1 to `v`, `s2` its mirror
/// image from 1 to `conj(v)`, and `s3` the arc of the circle centred at the
/// real point `w` from `conj(v)` to `v` that avoids 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcTriangle {
    pub theta: f64,
    pub u: Point,
    pub v: Point,
    pub w: Point,
    pub beta: f64,
    pub s1: ArcSegment,
    pub s2: ArcSegment,
    pub s3: ArcSegment,
}

impl ArcTriangle {
    /// Radius of the circles carrying `s1` and `s2`.
    pub fn side_radius(&self) -> f64 {
        self.u.y
    }

    /// Radius of the circle carrying `s3`.
    pub fn base_radius(&self) -> f64 {
        self.v.dist(self.w)
    }

    /// Closed-triangle membership: inside the `s3` disk, outside the open
    /// `s1` and `s2` disks, all up to `tol`.
    pub fn contains(&self, z: Point, tol: f64) -> bool {
        let r = self.side_radius();
        let lower = Point::new(self.u.x, -self.u.y);
        z.dist(self.w) <= self.base_radius() + tol && z.dist(self.u) >= r - tol && z.dist(lower) >= r - tol
    }
}

/// Builds the arc triangle for `θ ∈ (0, π/6]`.
pub fn arc_triangle(theta: f64) -> Result<ArcTriangle, GeometryError> {
    if !(theta > 0.0 && theta <= FRAC_PI_6 + 1e-15) {
        return Err(GeometryError::InvalidParameter(format!("theta = {theta} outside (0, π/6]")));
    }
    let t = theta.tan();
    let u = Point::polar(1.0 / theta.cos(), theta);
    let v = u + Point::polar(t, theta);
    // the tangent to S(u, Im u) at v meets the real axis at w
    let d = (v - u).perp();
    let w = Point::new(v.x - v.y * d.x / d.y, 0.0);
    let beta = (v - w).angle();
    let r3 = v.dist(w);
    let s1 = ArcSegment::arc(u, t, -FRAC_PI_2, theta);
    let s2 = ArcSegment::arc(Point::new(u.x, -u.y), t, FRAC_PI_2, -theta);
    let s3 = ArcSegment::arc(w, r3, TAU - beta, TAU + beta);
    Ok(ArcTriangle {
        theta,
        u,
        v,
        w,
        beta,
        s1,
        s2,
        s3,
    })
}

/// Sub-arc of `s1` next to the cusp cut out by a circle of radius `s`
/// centred at 1. Returns its opening angle `θ₂` (seen from `u`) and the arc.
pub fn cut_subarc(theta: f64, s: f64) -> Result<(f64, ArcSegment), GeometryError> {
    let tri = arc_triangle(theta)?;
    let limit = tri.base_radius() / 3.0;
    if !(s > 0.0 && s < limit) {
        return Err(GeometryError::InvalidParameter(format!("s = {s} outside (0, {limit})")));
    }
    let theta2 = 2.0 * (s / tri.u.y).atan();
    Ok((theta2, ArcSegment::arc(tri.u, tri.u.y, 1.5 * std::f64::consts::PI, 1.5 * std::f64::consts::PI + theta2)))
}
