use serde::{Deserialize, Serialize};

use super::{capacity, CapacityOptions, CapacityResult, FemError};
use crate::geometry::{
    build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks, CondenserSpec, Family,
    SpikedAnnulusParams, TangentDisksParams,
};
use crate::metrics::{qh_circular_maze_closed, qh_spiked_annulus_closed, qh_square_maze_closed};
use crate::par;

/// Least-squares line through (log x, log y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl RateFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit, FemError> {
    if xs.len() != ys.len() {
        return Err(FemError::InvalidParameter("x and y lengths differ".into()));
    }
    if xs.len() < 3 {
        return Err(FemError::TooFewPoints(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(FemError::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FemError::InvalidParameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept: my - slope * mx, r_squared, points: xs.len() })
}

fn family_spec(family: Family, param: u32) -> Result<(CondenserSpec, f64), FemError> {
    Ok(match family {
        Family::SquareMaze => (build_square_maze(param)?, 2.0 * qh_square_maze_closed(param)),
        Family::CircularMaze => (build_circular_maze(param)?, 2.0 * qh_circular_maze_closed(param)),
        Family::SpikedAnnulus => {
            (build_spiked_annulus(SpikedAnnulusParams::with_spikes(param))?, 2.0 * qh_spiked_annulus_closed(param))
        }
        f => return Err(FemError::InvalidParameter(format!("no rate study for family {}", f.name()))),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub family: Family,
    pub params: Vec<u32>,
    /// Feature scale 1/(2m) or 1/(2M).
    pub scale: Vec<f64>,
    pub capacities: Vec<CapacityResult>,
    /// log capacity against log scale.
    pub capacity_fit: RateFit,
    pub qh_perimeters: Vec<f64>,
    /// |cap − perimeter| / cap.
    pub qh_rel_errors: Vec<f64>,
    /// log relative error against log scale; absent if an error vanished.
    pub qh_fit: Option<RateFit>,
}

impl ConvergenceStudy {
    /// Growth rate of the capacity as the scale shrinks (minus the slope).
    pub fn rate(&self) -> f64 {
        -self.capacity_fit.slope
    }
}

/// Capacities of a maze family over a parameter sweep, with the log-log
/// growth rate and the relative gap between capacity and QH perimeter.
/// Parameters run as independent tasks; results are in ascending order.
pub fn convergence_study(family: Family, params: &[u32], opts: &CapacityOptions) -> Result<ConvergenceStudy, FemError> {
    if params.len() < 3 {
        return Err(FemError::TooFewPoints(params.len()));
    }
    let mut params = params.to_vec();
    params.sort_unstable();
    params.dedup();
    let runs = par::map_slice(opts.solver.exec, &params, |&m| {
        let (spec, perimeter) = family_spec(family, m)?;
        Ok((capacity(&spec, opts)?, perimeter))
    });
    let (capacities, qh_perimeters): (Vec<CapacityResult>, Vec<f64>) =
        runs.into_iter().collect::<Result<Vec<_>, FemError>>()?.into_iter().unzip();
    let scale: Vec<f64> = params.iter().map(|&m| 1.0 / (2.0 * m as f64)).collect();
    let caps: Vec<f64> = capacities.iter().map(|c| c.value).collect();
    let capacity_fit = fit_loglog(&scale, &caps)?;
    let qh_rel_errors: Vec<f64> = caps.iter().zip(&qh_perimeters).map(|(c, p)| (c - p).abs() / c).collect();
    let qh_fit = fit_loglog(&scale, &qh_rel_errors).ok();
    Ok(ConvergenceStudy { family, params, scale, capacities, capacity_fit, qh_perimeters, qh_rel_errors, qh_fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefeaturePoint {
    pub cut_radius: f64,
    pub capacity: f64,
    pub est_rel_error: f64,
    /// (cap(0) − cap(s)) / cap(0).
    pub reduction: f64,
}

/// Capacity of the tangent-disk condenser as the cusps are cut away with
/// growing radius. A zero radius is always included as the baseline.
pub fn defeature_study(
    n: u32,
    rho: f64,
    cut_radii: &[f64],
    opts: &CapacityOptions,
) -> Result<Vec<DefeaturePoint>, FemError> {
    if cut_radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FemError::InvalidParameter("cut radii must be strictly increasing".into()));
    }
    let mut radii = cut_radii.to_vec();
    if radii.first() != Some(&0.0) {
        radii.insert(0, 0.0);
    }
    let runs = par::map_slice(opts.solver.exec, &radii, |&s| {
        let spec = build_tangent_disks(TangentDisksParams { n, rho, cut_radius: s })?;
        capacity(&spec, opts)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, FemError>>()?;
    let base = runs[0].value;
    Ok(radii
        .iter()
        .zip(&runs)
        .map(|(&s, c)| DefeaturePoint {
            cut_radius: s,
            capacity: c.value,
            est_rel_error: c.est_rel_error,
            reduction: (base - c.value) / base,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_has_slope_minus_two() {
        let ms = [7.0, 9.0, 11.0, 14.0];
        let xs: Vec<f64> = ms.iter().map(|m| 1.0 / (2.0 * m)).collect();
        let ys: Vec<f64> = ms.iter().map(|m| 3.7 * (2.0 * m) * (2.0 * m)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.predict(xs[2]) - ys[2]).abs() < 1e-9 * ys[2]);
    }

    #[test]
    fn refuses_underdetermined_fits() {
        assert_eq!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]), Err(FemError::TooFewPoints(2)));
        assert!(matches!(
            convergence_study(Family::SquareMaze, &[7, 9], &CapacityOptions::default()),
            Err(FemError::TooFewPoints(2))
        ));
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }
}
