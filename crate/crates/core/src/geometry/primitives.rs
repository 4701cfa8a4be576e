use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Geometric coincidence tolerance for endpoints and junctions.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Largest turning angle of one chord in a boundary discretization.
pub const MAX_PIECE_SWEEP: f64 = PI / 8.0;

/// A point (or vector) in the plane. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point::new(radius * c, radius * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Ccw,
    Cw,
}

/// Primitive boundary piece: a straight segment or a circular arc.
///
/// An arc runs from `angle_start` to `angle_end`; for `Ccw` the end angle is
/// the larger one, for `Cw` the smaller one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcSegment {
    Segment {
        p0: Point,
        p1: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
        orientation: Orientation,
    },
}

/// Reduces an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl ArcSegment {
    pub fn segment(p0: Point, p1: Point) -> Self {
        ArcSegment::Segment { p0, p1 }
    }

    /// Arc from `angle_start` to `angle_end`; orientation follows the sign of
    /// the sweep.
    pub fn arc(center: Point, radius: f64, angle_start: f64, angle_end: f64) -> Self {
        let orientation = if angle_end >= angle_start {
            Orientation::Ccw
        } else {
            Orientation::Cw
        };
        ArcSegment::Arc {
            center,
            radius,
            angle_start,
            angle_end,
            orientation,
        }
    }

    pub fn full_circle(center: Point, radius: f64) -> Self {
        ArcSegment::arc(center, radius, 0.0, TAU)
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, ArcSegment::Arc { .. })
    }

    /// Checks the primitive invariants.
    pub fn check(&self) -> Result<(), GeometryError> {
        match *self {
            ArcSegment::Segment { p0, p1 } => {
                if !p0.is_finite() || !p1.is_finite() {
                    return Err(GeometryError::InvalidPrimitive("non-finite segment endpoint".into()));
                }
                if p0.dist(p1) <= COINCIDENCE_TOL {
                    return Err(GeometryError::InvalidPrimitive("degenerate segment".into()));
                }
            }
            ArcSegment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                orientation,
            } => {
                if !center.is_finite() || !angle_start.is_finite() || !angle_end.is_finite() {
                    return Err(GeometryError::InvalidPrimitive("non-finite arc data".into()));
                }
                if !(radius > 0.0) || !radius.is_finite() {
                    return Err(GeometryError::InvalidPrimitive(format!("arc radius {radius} not positive")));
                }
                let sweep = angle_end - angle_start;
                if sweep.abs() <= 0.0 || sweep.abs() > TAU + 1e-12 {
                    return Err(GeometryError::InvalidPrimitive(format!("arc sweep {sweep} outside (0, 2π]")));
                }
                let expected = if sweep > 0.0 { Orientation::Ccw } else { Orientation::Cw };
                if expected != orientation {
                    return Err(GeometryError::InvalidPrimitive("arc orientation disagrees with sweep".into()));
                }
            }
        }
        Ok(())
    }

    /// Signed sweep of an arc (zero for segments).
    pub fn sweep(&self) -> f64 {
        match *self {
            ArcSegment::Segment { .. } => 0.0,
            ArcSegment::Arc {
                angle_start,
                angle_end,
                ..
            } => angle_end - angle_start,
        }
    }

    /// Point at parameter `t ∈ [0, 1]`, uniform in arc length.
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            ArcSegment::Segment { p0, p1 } => p0.lerp(p1, t),
            ArcSegment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                ..
            } => center + Point::polar(radius, angle_start + t * (angle_end - angle_start)),
        }
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            ArcSegment::Segment { p0, p1 } => p0.dist(p1),
            ArcSegment::Arc { radius, .. } => radius * self.sweep().abs(),
        }
    }

    /// Unit tangent in the direction of travel at parameter `t`.
    pub fn tangent_at(&self, t: f64) -> Point {
        match *self {
            ArcSegment::Segment { p0, p1 } => (p1 - p0) * (1.0 / p0.dist(p1)),
            ArcSegment::Arc {
                angle_start,
                angle_end,
                ..
            } => {
                let a = angle_start + t * (angle_end - angle_start);
                let dir = Point::polar(1.0, a).perp();
                if angle_end >= angle_start {
                    dir
                } else {
                    -dir
                }
            }
        }
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        match *self {
            ArcSegment::Segment { p0, p1 } => ArcSegment::segment(p1, p0),
            ArcSegment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                ..
            } => ArcSegment::arc(center, radius, angle_end, angle_start),
        }
    }

    /// Rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (sn, cs) = angle.sin_cos();
        let rot = |p: Point| Point::new(cs * p.x - sn * p.y, sn * p.x + cs * p.y);
        match *self {
            ArcSegment::Segment { p0, p1 } => ArcSegment::segment(rot(p0), rot(p1)),
            ArcSegment::Arc { center, radius, angle_start, angle_end, orientation } => ArcSegment::Arc {
                center: rot(center),
                radius,
                angle_start: angle_start + angle,
                angle_end: angle_end + angle,
                orientation,
            },
        }
    }

    /// Parameter of the angle `a` on an arc if it lies within the swept range.
    fn arc_param_of_angle(&self, a: f64) -> Option<f64> {
        let ArcSegment::Arc {
            angle_start,
            angle_end,
            ..
        } = *self
        else {
            return None;
        };
        let sweep = angle_end - angle_start;
        let rel = if sweep >= 0.0 {
            normalize_angle(a - angle_start)
        } else {
            normalize_angle(angle_start - a)
        };
        let t = rel / sweep.abs();
        if t <= 1.0 {
            Some(t)
        } else {
            None
        }
    }

    /// Closest point of the primitive to `p` and its parameter.
    pub fn closest(&self, p: Point) -> (Point, f64) {
        match *self {
            ArcSegment::Segment { p0, p1 } => {
                let d = p1 - p0;
                let t = ((p - p0).dot(d) / d.norm2()).clamp(0.0, 1.0);
                (p0.lerp(p1, t), t)
            }
            ArcSegment::Arc { center, radius, .. } => {
                let v = p - center;
                if v.norm() > 0.0 {
                    if let Some(t) = self.arc_param_of_angle(v.angle()) {
                        return (center + v * (radius / v.norm()), t);
                    }
                }
                let (s, e) = (self.start(), self.end());
                if p.dist(s) <= p.dist(e) {
                    (s, 0.0)
                } else {
                    (e, 1.0)
                }
            }
        }
    }

    /// Euclidean distance from `p` to the primitive.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            ArcSegment::Segment { .. } => self.closest(p).0.dist(p),
            ArcSegment::Arc { center, radius, .. } => {
                let v = p - center;
                let r = v.norm();
                if r > 0.0 && self.arc_param_of_angle(v.angle()).is_some() {
                    (r - radius).abs()
                } else {
                    p.dist(self.start()).min(p.dist(self.end()))
                }
            }
        }
    }

    /// Projection onto the supporting line or circle (used to snap
    /// refinement midpoints back onto the exact geometry).
    pub fn project(&self, p: Point) -> Point {
        match *self {
            ArcSegment::Segment { .. } => self.closest(p).0,
            ArcSegment::Arc { center, radius, .. } => {
                let v = p - center;
                let r = v.norm();
                if r == 0.0 {
                    p
                } else {
                    center + v * (radius / r)
                }
            }
        }
    }

    /// Parameter of a point lying on the primitive (within `tol`).
    pub fn param_of(&self, p: Point, tol: f64) -> Option<f64> {
        let (q, t) = self.closest(p);
        if q.dist(p) <= tol {
            Some(t)
        } else {
            None
        }
    }

    /// The sub-piece between parameters `t0 < t1`.
    pub fn sub(&self, t0: f64, t1: f64) -> Self {
        match *self {
            ArcSegment::Segment { .. } => ArcSegment::segment(self.point_at(t0), self.point_at(t1)),
            ArcSegment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                ..
            } => {
                let s = angle_end - angle_start;
                ArcSegment::arc(center, radius, angle_start + t0 * s, angle_start + t1 * s)
            }
        }
    }

    /// Number of equal pieces needed so that each chord deviates from the
    /// curve by at most `chord_tol`, turns by at most [`MAX_PIECE_SWEEP`] and
    /// is no longer than `max_edge`.
    pub fn pieces_for(&self, chord_tol: f64, max_edge: Option<f64>) -> usize {
        let mut n = 1usize;
        if let ArcSegment::Arc { radius, .. } = *self {
            let sweep = self.sweep().abs();
            // sagitta r(1 - cos(Δ/2)) <= tol
            let ratio = (1.0 - chord_tol / radius).clamp(-1.0, 1.0);
            let max_piece = 2.0 * ratio.acos();
            let max_piece = max_piece.min(MAX_PIECE_SWEEP);
            let by_tol = if max_piece > 0.0 { (sweep / max_piece).ceil() as usize } else { 1 };
            // a closed circle needs at least three chords
            let min_pieces = if sweep > PI { 3 } else { 1 };
            n = by_tol.max(min_pieces);
        }
        if let Some(h) = max_edge {
            n = n.max((self.length() / h).ceil() as usize);
        }
        n.max(1)
    }

    /// Angle subtended by the primitive as seen from `p`, counted along the
    /// curve (so that summing over a closed chain gives 2π times its winding
    /// number around `p`).
    pub fn winding_angle(&self, p: Point) -> f64 {
        let a = self.start() - p;
        let b = self.end() - p;
        let chord = a.cross(b).atan2(a.dot(b));
        match *self {
            ArcSegment::Segment { .. } => chord,
            ArcSegment::Arc { center, radius, .. } => {
                // The closed loop "arc, then chord back" encloses the region
                // between them once; account for it when p lies inside.
                if p.dist(center) >= radius {
                    return chord;
                }
                let sweep = self.sweep();
                let inside_cap = if sweep.abs() >= TAU - 1e-15 {
                    true
                } else {
                    let s = self.start();
                    let e = self.end();
                    let mid = self.point_at(0.5);
                    let side_mid = (e - s).cross(mid - s);
                    let side_p = (e - s).cross(p - s);
                    side_mid * side_p > 0.0
                };
                if inside_cap {
                    chord + TAU * sweep.signum()
                } else {
                    chord
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match *self {
            ArcSegment::Segment { p0, p1 } => (
                Point::new(p0.x.min(p1.x), p0.y.min(p1.y)),
                Point::new(p0.x.max(p1.x), p0.y.max(p1.y)),
            ),
            ArcSegment::Arc { center, radius, .. } => {
                let mut pts = vec![self.start(), self.end()];
                for k in 0..4 {
                    let a = k as f64 * PI / 2.0;
                    if self.arc_param_of_angle(a).is_some() {
                        pts.push(center + Point::polar(radius, a));
                    }
                }
                let mut lo = pts[0];
                let mut hi = pts[0];
                for q in pts {
                    lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
                    hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
                }
                (lo, hi)
            }
        }
    }

    /// Euclidean distance between two primitives (zero when they meet).
    pub fn distance_to(&self, other: &ArcSegment) -> f64 {
        if !self.intersections(other).is_empty() {
            return 0.0;
        }
        let mut best = [self.start(), self.end()]
            .iter()
            .map(|&q| other.distance(q))
            .chain([other.start(), other.end()].iter().map(|&q| self.distance(q)))
            .fold(f64::INFINITY, f64::min);
        for (a, b) in [(self, other), (other, self)] {
            if let ArcSegment::Arc { center, radius, .. } = *a {
                // points of `a` where the distance to `b` can be critical
                let dirs: Vec<Point> = match *b {
                    ArcSegment::Segment { .. } => {
                        let foot = b.closest(center).0;
                        vec![foot - center]
                    }
                    ArcSegment::Arc { center: cb, .. } => vec![cb - center, center - cb],
                };
                for d in dirs {
                    if d.norm() > 0.0 && a.arc_param_of_angle(d.angle()).is_some() {
                        best = best.min(b.distance(center + d * (radius / d.norm())));
                    }
                }
            }
        }
        best
    }

    /// Points where the two primitives meet. Overlapping collinear or
    /// co-circular pieces report the endpoints of the overlap.
    pub fn intersections(&self, other: &ArcSegment) -> Vec<Point> {
        let tol = 1e-10;
        let on_both = |q: Point| self.distance(q) <= tol && other.distance(q) <= tol;
        let mut out: Vec<Point> = Vec::new();
        let push = |q: Point, out: &mut Vec<Point>| {
            if on_both(q) && out.iter().all(|o| o.dist(q) > tol) {
                out.push(q);
            }
        };
        match (*self, *other) {
            (ArcSegment::Segment { p0: a0, p1: a1 }, ArcSegment::Segment { p0: b0, p1: b1 }) => {
                let da = a1 - a0;
                let db = b1 - b0;
                let denom = da.cross(db);
                let scale = da.norm() * db.norm();
                if denom.abs() > 1e-14 * scale {
                    let t = (b0 - a0).cross(db) / denom;
                    push(a0 + da * t, &mut out);
                } else {
                    for q in [a0, a1, b0, b1] {
                        push(q, &mut out);
                    }
                }
            }
            (ArcSegment::Segment { p0, p1 }, ArcSegment::Arc { center, radius, .. })
            | (ArcSegment::Arc { center, radius, .. }, ArcSegment::Segment { p0, p1 }) => {
                let d = p1 - p0;
                let f = p0 - center;
                let a = d.norm2();
                let b = 2.0 * f.dot(d);
                let c = f.norm2() - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc >= -1e-14 * (b * b).max(1e-300) {
                    let sq = disc.max(0.0).sqrt();
                    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                        push(p0 + d * t, &mut out);
                    }
                }
                for q in [self.start(), self.end(), other.start(), other.end()] {
                    push(q, &mut out);
                }
            }
            (
                ArcSegment::Arc {
                    center: c0, radius: r0, ..
                },
                ArcSegment::Arc {
                    center: c1, radius: r1, ..
                },
            ) => {
                let dv = c1 - c0;
                let d = dv.norm();
                if d < 1e-14 && (r0 - r1).abs() < 1e-14 {
                    for q in [self.start(), self.end(), other.start(), other.end()] {
                        push(q, &mut out);
                    }
                } else if d > 0.0 && d <= r0 + r1 + tol && d >= (r0 - r1).abs() - tol {
                    let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
                    let h = (r0 * r0 - a * a).max(0.0).sqrt();
                    let base = c0 + dv * (a / d);
                    let off = dv.perp() * (h / d);
                    push(base + off, &mut out);
                    push(base - off, &mut out);
                }
                for q in [self.start(), self.end(), other.start(), other.end()] {
                    push(q, &mut out);
                }
            }
        }
        out
    }
}

/// Ordered sequence of primitives joined end to start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub segments: Vec<ArcSegment>,
    pub closed: bool,
}

impl Chain {
    pub fn open(segments: Vec<ArcSegment>) -> Self {
        Chain {
            segments,
            closed: false,
        }
    }

    pub fn closed(segments: Vec<ArcSegment>) -> Self {
        Chain { segments, closed: true }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Chain { segments: self.segments.iter().map(|s| s.rotated(angle)).collect(), closed: self.closed }
    }

    /// Closed polygon through the given vertices.
    pub fn polygon(vertices: &[Point]) -> Self {
        let n = vertices.len();
        Chain::closed(
            (0..n)
                .map(|i| ArcSegment::segment(vertices[i], vertices[(i + 1) % n]))
                .collect(),
        )
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(ArcSegment::length).sum()
    }

    pub fn start(&self) -> Option<Point> {
        self.segments.first().map(ArcSegment::start)
    }

    pub fn end(&self) -> Option<Point> {
        self.segments.last().map(ArcSegment::end)
    }

    /// Largest gap between consecutive endpoints (including the closing
    /// joint for closed chains).
    pub fn junction_defect(&self) -> f64 {
        let n = self.segments.len();
        let mut worst: f64 = 0.0;
        for i in 0..n.saturating_sub(1) {
            worst = worst.max(self.segments[i].end().dist(self.segments[i + 1].start()));
        }
        if self.closed && n > 0 {
            worst = worst.max(self.segments[n - 1].end().dist(self.segments[0].start()));
        }
        worst
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding number of a closed chain around `p`.
    pub fn winding_number(&self, p: Point) -> i64 {
        let total: f64 = self.segments.iter().map(|s| s.winding_angle(p)).sum();
        (total / TAU).round() as i64
    }

    /// Signed enclosed area (positive for counter-clockwise loops), exact
    /// for arcs.
    pub fn signed_area(&self) -> f64 {
        let mut twice = 0.0;
        for s in &self.segments {
            match *s {
                ArcSegment::Segment { p0, p1 } => twice += p0.cross(p1),
                ArcSegment::Arc {
                    center,
                    radius,
                    angle_start: a0,
                    angle_end: a1,
                    ..
                } => {
                    twice += radius * center.x * (a1.sin() - a0.sin())
                        - radius * center.y * (a1.cos() - a0.cos())
                        + radius * radius * (a1 - a0);
                }
            }
        }
        0.5 * twice
    }

    /// Pairs of primitive indices that intersect away from their shared
    /// junctions.
    pub fn self_intersections(&self) -> Vec<(usize, usize)> {
        let n = self.segments.len();
        let mut bad = Vec::new();
        let tol = 1e-9;
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent_fwd = j == i + 1;
                let adjacent_wrap = self.closed && i == 0 && j == n - 1;
                let pts = self.segments[i].intersections(&self.segments[j]);
                let mut allowed: Vec<Point> = Vec::new();
                if adjacent_fwd {
                    allowed.push(self.segments[i].end());
                }
                if adjacent_wrap {
                    allowed.push(self.segments[i].start());
                }
                let offending = pts
                    .iter()
                    .any(|q| allowed.iter().all(|a| a.dist(*q) > tol));
                if offending {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn check(&self) -> Result<(), GeometryError> {
        if self.segments.is_empty() {
            return Err(GeometryError::InvalidPrimitive("empty chain".into()));
        }
        for s in &self.segments {
            s.check()?;
        }
        let defect = self.junction_defect();
        if defect > COINCIDENCE_TOL {
            return Err(GeometryError::BrokenChain(defect));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arc_distance_inside_and_outside_range() {
        let a = ArcSegment::arc(Point::ORIGIN, 1.0, 0.0, PI / 2.0);
        assert_relative_eq!(a.distance(Point::new(2.0, 2.0)), 8f64.sqrt() - 1.0, epsilon = 1e-14);
        // below the arc's angular range: nearest is the start point (1,0)
        assert_relative_eq!(a.distance(Point::new(1.0, -1.0)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(a.distance(Point::ORIGIN), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn clockwise_arc_params() {
        let a = ArcSegment::arc(Point::ORIGIN, 2.0, PI, 0.0);
        assert_eq!(a.check(), Ok(()));
        let mid = a.point_at(0.5);
        assert_relative_eq!(mid.y, 2.0, epsilon = 1e-14);
        assert_relative_eq!(a.distance(Point::new(0.0, 3.0)), 1.0, epsilon = 1e-14);
        assert_relative_eq!(a.distance(Point::new(0.0, -3.0)), 13f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_primitives() {
        assert!(ArcSegment::segment(Point::ORIGIN, Point::ORIGIN).check().is_err());
        assert!(ArcSegment::arc(Point::ORIGIN, -1.0, 0.0, 1.0).check().is_err());
        assert!(ArcSegment::arc(Point::ORIGIN, 1.0, 0.0, 7.0).check().is_err());
        assert!(ArcSegment::arc(Point::ORIGIN, 1.0, 0.0, 0.0).check().is_err());
    }

    #[test]
    fn winding_of_circle_and_square() {
        let c = Chain::closed(vec![ArcSegment::full_circle(Point::new(1.0, 1.0), 0.5)]);
        assert_eq!(c.winding_number(Point::new(1.2, 1.1)), 1);
        assert_eq!(c.winding_number(Point::new(2.0, 1.0)), 0);
        let sq = Chain::polygon(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]);
        assert_eq!(sq.winding_number(Point::new(0.5, 0.5)), 1);
        assert_eq!(sq.winding_number(Point::new(1.5, 0.5)), 0);
        assert_relative_eq!(sq.signed_area(), 1.0);
    }

    #[test]
    fn winding_with_split_arcs() {
        // disk built from a cw major arc and a cw minor arc
        let c = Chain::closed(vec![
            ArcSegment::arc(Point::ORIGIN, 1.0, 0.3, 0.3 - 5.0),
            ArcSegment::arc(Point::ORIGIN, 1.0, 0.3 - 5.0, 0.3 - TAU),
        ]);
        for p in [Point::new(0.0, 0.0), Point::new(0.9, 0.1), Point::new(-0.5, -0.8)] {
            assert_eq!(c.winding_number(p), -1, "{p:?}");
        }
        assert_eq!(c.winding_number(Point::new(1.1, 0.0)), 0);
        assert_relative_eq!(c.signed_area(), -PI, epsilon = 1e-13);
    }

    #[test]
    fn intersections_basic() {
        let s = ArcSegment::segment(Point::new(-2.0, 0.0), Point::new(2.0, 0.0));
        let c = ArcSegment::full_circle(Point::ORIGIN, 1.0);
        assert_eq!(s.intersections(&c).len(), 2);
        let t = ArcSegment::segment(Point::new(0.0, -1.0), Point::new(0.0, 1.0));
        assert_eq!(s.intersections(&t), vec![Point::new(0.0, 0.0)]);
        let far = ArcSegment::segment(Point::new(0.0, 2.0), Point::new(1.0, 3.0));
        assert!(s.intersections(&far).is_empty());
        let c2 = ArcSegment::full_circle(Point::new(1.5, 0.0), 1.0);
        assert_eq!(c.intersections(&c2).len(), 2);
    }

    #[test]
    fn self_intersection_detected() {
        let bow = Chain::polygon(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(!bow.self_intersections().is_empty());
        let sq = Chain::polygon(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(sq.self_intersections().is_empty());
    }

    #[test]
    fn chord_pieces_bound_sagitta() {
        let a = ArcSegment::arc(Point::ORIGIN, 0.8, 0.1, 4.0);
        let tol = 1e-3;
        let n = a.pieces_for(tol, None);
        let delta = a.sweep().abs() / n as f64;
        assert!(0.8 * (1.0 - (delta / 2.0).cos()) <= tol * (1.0 + 1e-12));
    }
}
