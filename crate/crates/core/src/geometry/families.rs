use std::f64::consts::{PI, TAU};

use super::{ArcSegment, Chain, Compact, CondenserSpec, Family, FamilyParams, GeometryError, Point};

fn invalid(msg: impl Into<String>) -> GeometryError {
    GeometryError::InvalidParameter(msg.into())
}

/// Square maze: unit square with `m - 1` horizontal walls of length
/// `1 - 1/m` at heights `k/m`, alternately attached to the left and right
/// sides, and a serpentine compact chain at clearance `1/(2m)`.
pub fn build_square_maze(m: u32) -> Result<CondenserSpec, GeometryError> {
    if m < 3 {
        return Err(invalid("m must be ≥ 3"));
    }
    let mf = m as f64;
    let h = 1.0 / mf;
    let square = Chain::polygon(&[
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ]);
    let mut outer = vec![square];
    for k in 1..m {
        let y = k as f64 / mf;
        let wall = if k % 2 == 1 {
            ArcSegment::segment(Point::new(0.0, y), Point::new(1.0 - h, y))
        } else {
            ArcSegment::segment(Point::new(1.0, y), Point::new(h, y))
        };
        outer.push(Chain::open(vec![wall]));
    }

    let lo = 0.5 * h;
    let hi = 1.0 - 0.5 * h;
    let mut pieces = Vec::with_capacity(2 * m as usize - 1);
    for k in 1..=m {
        let y = (2 * k - 1) as f64 / (2.0 * mf);
        // odd runs head right (their wall above is attached on the left)
        let (x0, x1) = if k % 2 == 1 { (lo, hi) } else { (hi, lo) };
        pieces.push(ArcSegment::segment(Point::new(x0, y), Point::new(x1, y)));
        if k < m {
            let y_next = (2 * k + 1) as f64 / (2.0 * mf);
            pieces.push(ArcSegment::segment(Point::new(x1, y), Point::new(x1, y_next)));
        }
    }
    let params = FamilyParams {
        m: Some(m),
        ..Default::default()
    };
    Ok(CondenserSpec::new(
        Family::SquareMaze,
        params,
        outer,
        Compact::Curve(Chain::open(pieces)),
    ))
}

/// Angular width `α_k` of the gap in the wall circle of radius `(m-k)/m`.
pub fn circular_maze_gap(m: u32, k: u32) -> f64 {
    assert!(m >= 3 && (1..m).contains(&k), "gap index out of range");
    if k == m - 1 {
        2.0 * (0.5f64).asin()
    } else {
        2.0 * (1.0 / (2.0 * (m - k) as f64 - 1.0)).asin()
    }
}

/// Circular maze: unit disk with a spiral wall made of circle arcs of radii
/// `r_k = (m-k)/m` (each with a gap of width `α_k`) joined by radial
/// segments; the compact set threads the rings at radii `r_k + 1/(2m)`.
///
/// Gap `k` spans `(θ_k, θ_k + α_k)` with `θ_1 = α_1` and
/// `θ_{k+1} = θ_k - α_{k+1}`, so the radial wall below gap `k` sits at
/// `θ_k` and the wall arcs join into one spiral.
pub fn build_circular_maze(m: u32) -> Result<CondenserSpec, GeometryError> {
    if m < 3 {
        return Err(invalid("m must be ≥ 3"));
    }
    let mf = m as f64;
    let half = 0.5 / mf;
    let radius = |k: u32| (m - k) as f64 / mf;
    let alpha: Vec<f64> = (0..m).map(|k| if k == 0 { 0.0 } else { circular_maze_gap(m, k) }).collect();
    let mut theta = vec![0.0; m as usize];
    theta[1] = alpha[1];
    for k in 1..(m - 1) as usize {
        theta[k + 1] = theta[k] - alpha[k + 1];
    }

    let mut wall = Vec::new();
    for k in 1..m {
        let ku = k as usize;
        let r = radius(k);
        wall.push(ArcSegment::arc(Point::ORIGIN, r, theta[ku] + alpha[ku], theta[ku] + TAU));
        if k <= m - 2 {
            wall.push(ArcSegment::segment(
                Point::polar(r, theta[ku]),
                Point::polar(radius(k + 1), theta[ku]),
            ));
        }
    }
    let outer = vec![
        Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, 1.0)]),
        Chain::open(wall),
    ];

    let mut thread = Vec::new();
    for j in 1..m {
        let ju = j as usize;
        let rho = radius(j) + half;
        let gap_mid = theta[ju] + 0.5 * alpha[ju];
        let (start, end) = if j == 1 {
            (gap_mid - (TAU - alpha[1]), gap_mid)
        } else {
            (theta[ju - 1] + 0.5 * alpha[ju - 1], gap_mid + TAU)
        };
        thread.push(ArcSegment::arc(Point::ORIGIN, rho, start, end));
        let inner = if j <= m - 2 { radius(j + 1) + half } else { radius(j) };
        thread.push(ArcSegment::segment(Point::polar(rho, end), Point::polar(inner, end)));
    }
    let params = FamilyParams {
        m: Some(m),
        ..Default::default()
    };
    Ok(CondenserSpec::new(
        Family::CircularMaze,
        params,
        outer,
        Compact::Curve(Chain::open(thread)),
    ))
}

/// Parameters of the spiked annulus maze.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikedAnnulusParams {
    pub spikes: u32,
    pub r0: f64,
    pub r1: f64,
    pub l0: f64,
    pub l1: f64,
}

impl SpikedAnnulusParams {
    pub fn with_spikes(spikes: u32) -> Self {
        SpikedAnnulusParams {
            spikes,
            r0: 0.25,
            r1: 1.0,
            l0: 0.5,
            l1: 0.5,
        }
    }

    /// Radius of the inner arcs of the compact chain (midway between the
    /// inner circle and the tips of the outer spikes).
    pub fn inner_arc_radius(&self) -> f64 {
        0.5 * (self.r0 + self.r1 - self.l1)
    }

    /// Radius of the outer arcs (midway between the inner spike tips and the
    /// outer circle).
    pub fn outer_arc_radius(&self) -> f64 {
        0.5 * (self.r0 + self.l0 + self.r1)
    }

    pub fn radial_length(&self) -> f64 {
        self.outer_arc_radius() - self.inner_arc_radius()
    }

    pub fn inner_arc_count(&self) -> u32 {
        self.spikes / 2 - 1
    }

    pub fn outer_arc_count(&self) -> u32 {
        self.spikes / 2
    }
}

/// Spiked annulus: annulus `r0 < |z| < r1` with `M` radial spikes at angles
/// `2πj/M`, inner ones (even `j`) of length `l0` and outer ones (odd `j`) of
/// length `l1`. The compact chain meanders between them with its radial
/// pieces centred between adjacent spikes and arcs spanning `2π/M`.
pub fn build_spiked_annulus(p: SpikedAnnulusParams) -> Result<CondenserSpec, GeometryError> {
    let SpikedAnnulusParams { spikes, r0, r1, l0, l1 } = p;
    if spikes < 6 || spikes % 2 != 0 {
        return Err(invalid("M must be an even integer ≥ 6"));
    }
    if !(r0 > 0.0 && r1 > r0 && l0 > 0.0 && l1 > 0.0 && r0 + l0 < r1 && r1 - l1 > r0) {
        return Err(invalid("need 0 < r0 < r1 with spike tips strictly inside the annulus"));
    }
    let mf = spikes as f64;
    let mut outer = vec![
        Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, r1)]),
        Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, r0)]),
    ];
    for j in 0..spikes {
        let phi = TAU * j as f64 / mf;
        let spike = if j % 2 == 0 {
            ArcSegment::segment(Point::polar(r0, phi), Point::polar(r0 + l0, phi))
        } else {
            ArcSegment::segment(Point::polar(r1, phi), Point::polar(r1 - l1, phi))
        };
        outer.push(Chain::open(vec![spike]));
    }

    let (ri, ro) = (p.inner_arc_radius(), p.outer_arc_radius());
    let psi = |i: u32| (2.0 * i as f64 - 1.0) * PI / mf;
    let mut thread = Vec::new();
    for i in 0..spikes {
        let (a, b) = if i % 2 == 0 { (ri, ro) } else { (ro, ri) };
        thread.push(ArcSegment::segment(Point::polar(a, psi(i)), Point::polar(b, psi(i))));
        if i + 1 < spikes {
            thread.push(ArcSegment::arc(Point::ORIGIN, b, psi(i), psi(i + 1)));
        }
    }
    let params = FamilyParams {
        spikes: Some(spikes),
        r0: Some(r0),
        r1: Some(r1),
        l0: Some(l0),
        l1: Some(l1),
        ..Default::default()
    };
    Ok(CondenserSpec::new(
        Family::SpikedAnnulus,
        params,
        outer,
        Compact::Curve(Chain::open(thread)),
    ))
}

/// Parameters of the tangent-disk configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentDisksParams {
    pub n: u32,
    pub rho: f64,
    pub cut_radius: f64,
}

impl TangentDisksParams {
    /// Six disks internally tangent to the circle of radius 0.9.
    pub fn default_configuration() -> Self {
        TangentDisksParams {
            n: 6,
            rho: 0.6,
            cut_radius: 0.0,
        }
    }

    pub fn disk_radius(&self) -> f64 {
        self.rho * (PI / self.n as f64).sin()
    }

    pub fn center(&self, j: u32) -> Point {
        Point::polar(self.rho, TAU * j as f64 / self.n as f64)
    }

    /// Contact point of disks `j` and `j + 1`.
    pub fn tangency(&self, j: u32) -> Point {
        let n = self.n as f64;
        Point::polar(self.rho * (PI / n).cos(), PI * (2 * j + 1) as f64 / n)
    }
}

/// `n` mutually tangent disks of radius `ρ sin(π/n)` centred on the circle
/// of radius `ρ`, inside the unit disk. With `cut_radius > 0` the open disks
/// of that radius around each contact point are removed from `K`.
pub fn build_tangent_disks(p: TangentDisksParams) -> Result<CondenserSpec, GeometryError> {
    let TangentDisksParams { n, rho, cut_radius: s } = p;
    if n < 3 {
        return Err(invalid("n must be ≥ 3"));
    }
    let r = p.disk_radius();
    if !(rho > 0.0) || rho + r >= 1.0 {
        return Err(invalid("disks must lie inside the unit disk"));
    }
    if !(0.0..r).contains(&s) {
        return Err(invalid(format!("cut radius must satisfy 0 ≤ s < r = {r}")));
    }
    let nf = n as f64;
    let mut loops = Vec::with_capacity(n as usize);
    for j in 0..n {
        let c = p.center(j);
        let base = TAU * j as f64 / nf;
        // directions (seen from c) of the contacts with the next and previous disk
        let a_next = base + PI / nf + PI / 2.0;
        let a_prev = base - PI / nf - PI / 2.0;
        if s == 0.0 {
            loops.push(Chain::closed(vec![
                ArcSegment::arc(c, r, a_prev, a_next),
                ArcSegment::arc(c, r, a_next, a_prev + TAU),
            ]));
            continue;
        }
        let delta = 2.0 * (s / (2.0 * r)).asin();
        let t_next = p.tangency(j);
        let t_prev = p.tangency((j + n - 1) % n);
        let outer_arc = ArcSegment::arc(c, r, a_prev + delta, a_next - delta);
        let cut_next = notch(c, r, t_next, s, a_next - delta, a_next + delta);
        let cut_prev = notch(c, r, t_prev, s, a_prev + TAU - delta, a_prev + TAU + delta);
        let inner_sweep = (a_prev + TAU - delta) - (a_next + delta);
        let half_gap = 0.5 * t_next.dist(t_prev);
        if s <= half_gap {
            loops.push(Chain::closed(vec![
                outer_arc,
                cut_next,
                ArcSegment::arc(c, r, a_next + delta, a_prev + TAU - delta),
                cut_prev,
            ]));
            continue;
        }
        // the two cutting disks overlap inside the disk: split into an outer
        // piece and, if anything is left near the ring centre, an inner one
        let mid = t_next.midpoint(t_prev);
        let axis = c * (1.0 / c.norm());
        let h = (s * s - half_gap * half_gap).sqrt();
        let x_out = mid + axis * h;
        let y_in = mid - axis * h;
        let (_, tn_x) = cut_next.closest(x_out);
        let (_, tp_x) = cut_prev.closest(x_out);
        loops.push(Chain::closed(vec![outer_arc, cut_next.sub(0.0, tn_x), cut_prev.sub(tp_x, 1.0)]));
        if inner_sweep > 1e-9 && y_in.dist(c) < r - 1e-12 {
            let (_, tn_y) = cut_next.closest(y_in);
            let (_, tp_y) = cut_prev.closest(y_in);
            loops.push(Chain::closed(vec![
                ArcSegment::arc(c, r, a_next + delta, a_prev + TAU - delta),
                cut_prev.sub(0.0, tp_y),
                cut_next.sub(tn_y, 1.0),
            ]));
        }
    }
    let params = FamilyParams {
        n: Some(n),
        rho: Some(rho),
        cut_radius: Some(s),
        ..Default::default()
    };
    Ok(CondenserSpec::new(
        Family::TangentDisks,
        params,
        vec![Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, 1.0)])],
        Compact::Region(loops),
    ))
}

/// Arc of the cutting circle `S(t, s)` inside the disk `B(c, r)`, running
/// from the disk point at angle `from` to the one at angle `to`.
fn notch(c: Point, r: f64, t: Point, s: f64, from: f64, to: f64) -> ArcSegment {
    let p_from = c + Point::polar(r, from);
    let p_to = c + Point::polar(r, to);
    let psi = (c - t).angle();
    let gamma = (s / (2.0 * r)).acos();
    let sigma = if (t + Point::polar(s, psi + gamma)).dist(p_from) < (t + Point::polar(s, psi - gamma)).dist(p_from) {
        1.0
    } else {
        -1.0
    };
    debug_assert!((t + Point::polar(s, psi - sigma * gamma)).dist(p_to) < 1e-9);
    ArcSegment::arc(t, s, psi + sigma * gamma, psi - sigma * gamma)
}

/// Concentric ring `r0 < |z| < r1` with `K` the closed inner disk.
pub fn concentric_annulus(r0: f64, r1: f64) -> Result<CondenserSpec, GeometryError> {
    if !(r0 > 0.0 && r1 > r0) {
        return Err(invalid("need 0 < r0 < r1"));
    }
    let params = FamilyParams {
        r0: Some(r0),
        r1: Some(r1),
        ..Default::default()
    };
    Ok(CondenserSpec::new(
        Family::Custom,
        params,
        vec![Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, r1)])],
        Compact::Region(vec![Chain::closed(vec![ArcSegment::full_circle(Point::ORIGIN, r0)])]),
    ))
}
