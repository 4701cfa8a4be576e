use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::solve::{energy_with, solve, SolveOptions, SolveStats};
use super::{assemble_with, ElementOrder, FemError};
use crate::geometry::{validate_spec, CondenserSpec};
use crate::mesh::{discretize_boundary_with, refine_corners, refine_uniform, triangulate, CornerGrading, Mesh, TriangulateOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityOptions {
    pub order: ElementOrder,
    /// Area bound of the initial triangulation; defaults to clearance².
    pub max_area: Option<f64>,
    /// Defaults to clearance / 20.
    pub chord_tol: Option<f64>,
    /// Defaults to `CornerGrading::new(clearance)`.
    pub grading: Option<CornerGrading>,
    /// Uniform refinements after the graded initial mesh.
    pub levels: u32,
    pub target_rel_err: f64,
    pub solver: SolveOptions,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            order: ElementOrder::Quadratic,
            max_area: None,
            chord_tol: None,
            grading: None,
            levels: 2,
            target_rel_err: 1e-3,
            solver: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: u32,
    pub triangles: usize,
    pub dofs: usize,
    /// Dirichlet energy by quadrature.
    pub value: f64,
    /// The same energy as uᵀKu from the assembled matrix.
    pub matrix_energy: f64,
    pub solver: SolveStats,
    pub min_potential: f64,
    pub max_potential: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub mesh: f64,
    pub assembly: f64,
    pub solve: f64,
    pub energy: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.mesh + self.assembly + self.solve + self.energy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub extrapolated: f64,
    /// Observed convergence rate in powers of the mesh size.
    pub rate: f64,
    /// Estimated relative error of the last value.
    pub rel_error: f64,
}

/// Richardson extrapolation of a sequence on meshes halved at every step.
/// The rate comes from the last three values, clamped to [0.5, 4]; with
/// two values it is taken as 1.
pub fn richardson(values: &[f64]) -> Option<Richardson> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let last = values[n - 1];
    let d2 = values[n - 2] - last;
    let mut rate = 1.0;
    if n >= 3 {
        let d1 = values[n - 3] - values[n - 2];
        if d1 * d2 > 0.0 {
            rate = (d1 / d2).log2().clamp(0.5, 4.0);
        }
    }
    let extrapolated = last - d2 / (2f64.powf(rate) - 1.0);
    let rel_error = if extrapolated != 0.0 { (last - extrapolated).abs() / extrapolated.abs() } else { 0.0 };
    Some(Richardson { extrapolated, rate, rel_error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Energy on the finest level.
    pub value: f64,
    pub est_rel_error: f64,
    pub extrapolated: f64,
    pub rate: f64,
    /// Whether `est_rel_error` reached the target.
    pub converged: bool,
    pub order: ElementOrder,
    pub dofs: usize,
    pub clearance: f64,
    pub chord_tol: f64,
    pub levels: Vec<LevelRecord>,
    pub timings: Timings,
}

impl CapacityResult {
    /// Power of ten of the error estimate, as printed in compressed tables.
    pub fn error_exponent(&self) -> i32 {
        if self.est_rel_error > 0.0 {
            self.est_rel_error.log10().round() as i32
        } else {
            -16
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn csv_header() -> &'static str {
        "param,qh_length,qh_perimeter,capacity,error_exponent,dofs"
    }

    pub fn csv_row(&self, param: &str, qh: Option<(f64, f64)>) -> String {
        let (l, p) = match qh {
            Some((l, p)) => (format!("{l:?}"), format!("{p:?}")),
            None => (String::new(), String::new()),
        };
        format!("{param},{l},{p},{:?},{},{}", self.value, self.error_exponent(), self.dofs)
    }
}

/// Initial graded mesh of a condenser domain.
pub(crate) fn base_mesh(spec: &CondenserSpec, opts: &CapacityOptions) -> Result<(Mesh, f64, f64), FemError> {
    let diag = validate_spec(spec);
    if !diag.valid {
        let why: Vec<String> = diag.violations.iter().map(|v| v.to_string()).collect();
        return Err(FemError::InvalidSpec(why.join("; ")));
    }
    let clearance = diag.clearance;
    let chord_tol = opts.chord_tol.unwrap_or(clearance / 20.0);
    let max_area = opts.max_area.unwrap_or(clearance * clearance);
    if !(max_area > 0.0) {
        return Err(FemError::InvalidParameter(format!("max_area {max_area}")));
    }
    // constraint edges are never split by the area refinement, so they
    // have to be short already
    let max_edge = 1.5 * max_area.sqrt();
    let pslg = discretize_boundary_with(spec, chord_tol, Some(max_edge))?;
    let mesh = triangulate(&pslg, &TriangulateOptions::with_max_area(max_area))?;
    let grading = opts.grading.unwrap_or_else(|| CornerGrading::new(clearance));
    let corners: Vec<usize> = mesh.corners.iter().map(|c| c.0).collect();
    let mesh = refine_corners(&mesh, &corners, &grading)?;
    Ok((mesh, clearance, chord_tol))
}

/// Capacity by nested uniform refinement of a corner-graded mesh. Stops when
/// the Richardson estimate reaches the target or the level budget runs out
/// (`converged` tells which).
pub fn capacity(spec: &CondenserSpec, opts: &CapacityOptions) -> Result<CapacityResult, FemError> {
    let exec = opts.solver.exec;
    let mut timings = Timings::default();
    let clock = Instant::now();
    let (mut mesh, clearance, chord_tol) = base_mesh(spec, opts)?;
    timings.mesh += clock.elapsed().as_secs_f64();

    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut estimate = None;
    let mut converged = false;
    for level in 0..=opts.levels {
        if level > 0 {
            let clock = Instant::now();
            mesh = refine_uniform(&mesh)?;
            timings.mesh += clock.elapsed().as_secs_f64();
        }
        let clock = Instant::now();
        let system = assemble_with(&mesh, opts.order, exec)?;
        timings.assembly += clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let field = solve(&mesh, &system, &opts.solver)?;
        timings.solve += clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let value = energy_with(&field, exec);
        let matrix_energy = system.full.quadratic_form(exec, &field.values);
        timings.energy += clock.elapsed().as_secs_f64();
        let (lo, hi) = field.range();
        levels.push(LevelRecord {
            level,
            triangles: mesh.num_triangles(),
            dofs: system.dofs.num_dofs(),
            value,
            matrix_energy,
            solver: field.stats,
            min_potential: lo,
            max_potential: hi,
        });
        let values: Vec<f64> = levels.iter().map(|l| l.value).collect();
        estimate = richardson(&values);
        if let Some(r) = estimate {
            if r.rel_error <= opts.target_rel_err {
                converged = true;
                break;
            }
        }
    }
    let last = levels.last().expect("at least one level");
    let r = estimate.unwrap_or(Richardson { extrapolated: last.value, rate: f64::NAN, rel_error: f64::INFINITY });
    Ok(CapacityResult {
        value: last.value,
        est_rel_error: r.rel_error,
        extrapolated: r.extrapolated,
        rate: r.rate,
        converged,
        order: opts.order,
        dofs: last.dofs,
        clearance,
        chord_tol,
        levels,
        timings,
    })
}
