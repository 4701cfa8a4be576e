//! Hyperbolic and quasihyperbolic quantities.
//!
//! The closed-form QH lengths of the maze families are checked against
//! [`qh_length_numeric`], an adaptive Gauss–Kronrod integral of `1/d_Ω`
//! along the compact chain.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    build_circular_maze, build_spiked_annulus, build_square_maze, circular_maze_gap, validate_spec, ArcSegment,
    Chain, Compact, CondenserSpec, Family, FamilyParams, GeometryError, Point, SpikedAnnulusParams,
};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("point ({0}, {1}) is not in the upper half-plane")]
    OutsideHalfPlane(f64, f64),
    #[error("point ({0}, {1}) is not in the open unit disk")]
    OutsideDisk(f64, f64),
    #[error("curve touches the boundary (clearance {0:e})")]
    TouchesBoundary(f64),
    #[error("curve is not inside the domain")]
    NotInside,
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureFailed { tol: f64, err: f64 },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Hyperbolic distance in the upper half-plane.
pub fn hyperbolic_distance_halfplane(x: Point, y: Point) -> Result<f64, MetricsError> {
    for p in [x, y] {
        if !(p.y > 0.0) {
            return Err(MetricsError::OutsideHalfPlane(p.x, p.y));
        }
    }
    // cosh ρ = 1 + |x-y|²/(2 x₂ y₂), written as ρ = 2 asinh(|x-y| / (2√(x₂y₂)))
    Ok(2.0 * (x.dist(y) / (2.0 * (x.y * y.y).sqrt())).asinh())
}

fn check_disk(p: Point) -> Result<(), MetricsError> {
    if p.norm2() < 1.0 {
        Ok(())
    } else {
        Err(MetricsError::OutsideDisk(p.x, p.y))
    }
}

/// Hyperbolic distance in the unit disk, from
/// `sinh²(ρ/2) = |x-y|² / ((1-|x|²)(1-|y|²))`.
pub fn hyperbolic_distance_disk(x: Point, y: Point) -> Result<f64, MetricsError> {
    check_disk(x)?;
    check_disk(y)?;
    let denom = ((1.0 - x.norm2()) * (1.0 - y.norm2())).sqrt();
    Ok(2.0 * (x.dist(y) / denom).asinh())
}

/// Hyperbolic distance in the unit disk, from
/// `tanh(ρ/2) = |x-y| / |1 - x conj(y)|`.
pub fn hyperbolic_distance_disk_tanh(x: Point, y: Point) -> Result<f64, MetricsError> {
    check_disk(x)?;
    check_disk(y)?;
    // 1 - x ȳ
    let q = Point::new(1.0 - (x.x * y.x + x.y * y.y), -(x.y * y.x - x.x * y.y));
    Ok(2.0 * (x.dist(y) / q.norm()).atanh())
}

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
#[allow(clippy::excessive_precision)]
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 step: returns (Kronrod value, |K - G|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XK[i];
        let s = f(c - x) + f(c + x);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive G7/K15 quadrature of a positive integrand on `[a, b]`
/// to relative tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, MetricsError> {
    const MAX_INTERVALS: usize = 200_000;
    let mut intervals = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= tol * total.abs() {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(MetricsError::QuadratureFailed { tol, err: err / total.abs() });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(MetricsError::QuadratureFailed { tol, err: err / total.abs() });
        }
        for (x0, x1) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(&f, x0, x1);
            intervals.push((x0, x1, v, e));
        }
    }
}

/// Minimum distance between a chain and `∂Ω`.
pub fn chain_clearance(chain: &Chain, spec: &CondenserSpec) -> f64 {
    chain
        .segments
        .iter()
        .flat_map(|s| spec.outer.iter().flat_map(|c| c.segments.iter()).map(move |o| s.distance_to(o)))
        .fold(f64::INFINITY, f64::min)
}

/// Quasihyperbolic length `∫_γ |dz| / d_Ω(z)` of a chain lying strictly
/// inside `Ω`, to relative tolerance `tol`.
pub fn qh_length_numeric(chain: &Chain, spec: &CondenserSpec, tol: f64) -> Result<f64, MetricsError> {
    qh_length_numeric_with(chain, spec, tol, Execution::default())
}

pub fn qh_length_numeric_with(
    chain: &Chain,
    spec: &CondenserSpec,
    tol: f64,
    exec: Execution,
) -> Result<f64, MetricsError> {
    let clearance = chain_clearance(chain, spec);
    if !(clearance > 1e-12) {
        return Err(MetricsError::TouchesBoundary(clearance));
    }
    let probe = chain.segments.first().ok_or(MetricsError::NotInside)?.point_at(0.5);
    if !spec.contains(probe) {
        return Err(MetricsError::NotInside);
    }
    let parts = par::map_slice(exec, &chain.segments, |seg: &ArcSegment| {
        let len = seg.length();
        integrate_adaptive(
            |t| len / spec.boundary_distance_unchecked(seg.point_at(t)),
            0.0,
            1.0,
            tol,
        )
    });
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Closed-form and numeric quasihyperbolic length of a maze compact set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QhReport {
    pub family: Family,
    pub params: FamilyParams,
    pub closed_form_length: f64,
    pub closed_form_perimeter: f64,
    pub numeric_length: f64,
    pub rel_discrepancy: f64,
}

impl QhReport {
    fn new(spec: &CondenserSpec, closed: f64, tol: f64) -> Result<Self, MetricsError> {
        let Compact::Curve(chain) = &spec.compact else {
            return Err(MetricsError::InvalidSpec("compact set is not a curve".into()));
        };
        let numeric = qh_length_numeric(chain, spec, tol)?;
        Ok(QhReport {
            family: spec.family,
            params: spec.params.clone(),
            closed_form_length: closed,
            closed_form_perimeter: 2.0 * closed,
            numeric_length: numeric,
            rel_discrepancy: (numeric - closed).abs() / closed,
        })
    }

    /// The family parameter that labels table rows (`m` or `M`).
    pub fn param(&self) -> u32 {
        self.params.m.or(self.params.spikes).unwrap_or(0)
    }

    pub fn csv_header() -> &'static str {
        "family,param,length,perimeter,numeric_oracle,rel_discrepancy"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?},{:?}",
            self.family.name(),
            self.param(),
            self.closed_form_length,
            self.closed_form_perimeter,
            self.numeric_length,
            self.rel_discrepancy
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Default relative tolerance of the numeric oracle.
pub const QH_TOL: f64 = 1e-10;

pub fn qh_square_maze_closed(m: u32) -> f64 {
    let m = m as f64;
    2.0 * (m * m - 1.0)
}

pub fn qh_circular_maze_closed(m: u32) -> f64 {
    let mf = m as f64;
    let mut arcs = 0.0;
    for k in 1..m {
        arcs += (TAU - circular_maze_gap(m, k)) * (2.0 * mf - 2.0 * k as f64 + 1.0);
    }
    let mut radials = (1.5f64).ln() / (0.5 * circular_maze_gap(m, m - 1)).sin();
    for k in 1..m - 1 {
        let j = (m - k) as f64;
        radials += ((j + 0.5).ln() - (j - 0.5).ln()) / (0.5 * circular_maze_gap(m, k)).sin();
    }
    arcs + radials
}

pub fn qh_spiked_annulus_closed(spikes: u32) -> f64 {
    let mf = spikes as f64;
    mf * (7f64.ln() - 3f64.ln()) / (PI / (2.0 * mf)).sin() + 3.0 * PI * (mf - 2.0) / mf + 7.0 * PI
}

pub fn qh_square_maze(m: u32) -> Result<QhReport, MetricsError> {
    let spec = build_square_maze(m)?;
    QhReport::new(&spec, qh_square_maze_closed(m), QH_TOL)
}

pub fn qh_circular_maze(m: u32) -> Result<QhReport, MetricsError> {
    let spec = build_circular_maze(m)?;
    QhReport::new(&spec, qh_circular_maze_closed(m), QH_TOL)
}

pub fn qh_spiked_annulus(spikes: u32) -> Result<QhReport, MetricsError> {
    let spec = build_spiked_annulus(SpikedAnnulusParams::with_spikes(spikes))?;
    QhReport::new(&spec, qh_spiked_annulus_closed(spikes), QH_TOL)
}

/// `area(Ω) / d(K, ∂Ω)²`.
pub fn domain_quotient(spec: &CondenserSpec) -> Result<f64, MetricsError> {
    let d = validate_spec(spec);
    if !d.valid {
        let names: Vec<String> = d.violations.iter().map(|v| v.to_string()).collect();
        return Err(MetricsError::InvalidSpec(names.join("; ")));
    }
    Ok(spec.area() / (d.clearance * d.clearance))
}
