use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::json;

use condenser_core::conformal::{map_triangle_to_halfplane, to_complex, verify_triangle_map, Extended};
use condenser_core::fem::{
    capacity, convergence_study, defeature_study, fit_loglog, CapacityOptions, CapacityResult, ConvergenceStudy,
    ElementOrder, FemError, Preconditioner, RateFit, SolveOptions, Timings,
};
use condenser_core::geometry::{
    arc_triangle, build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks,
    concentric_annulus, validate_spec, CondenserSpec, Family, SpikedAnnulusParams, TangentDisksParams,
};
use condenser_core::metrics::{
    qh_circular_maze, qh_circular_maze_closed, qh_spiked_annulus, qh_spiked_annulus_closed, qh_square_maze,
    qh_square_maze_closed, QhReport,
};
use condenser_core::Execution;

use crate::manifest::RunManifest;
use crate::plot::{FitLine, LogLogPlot, Series};
use crate::{Cli, Command, FamilyArgs, FemArgs, InvalidInput, Maze, Study, EXIT_TOLERANCE};

/// Side images may deviate from their targets by this much before
/// `map-triangle` reports the tolerance as missed.
const MAP_TOL: f64 = 1e-10;

/// Prints to stdout, ignoring a closed pipe.
fn stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

impl Maze {
    fn family(self) -> Family {
        match self {
            Maze::SquareMaze => Family::SquareMaze,
            Maze::CircularMaze => Family::CircularMaze,
            Maze::SpikedAnnulus => Family::SpikedAnnulus,
        }
    }

    fn default_params(self) -> Vec<u32> {
        match self {
            Maze::SquareMaze => vec![7, 9, 11, 14],
            Maze::CircularMaze => vec![5, 7, 10, 12, 15],
            Maze::SpikedAnnulus => vec![10, 16, 20],
        }
    }

    /// Parses values and inclusive ranges `a..b`. Ranges of the spiked
    /// annulus keep only even spike counts.
    fn params(self, given: &Option<Vec<String>>) -> Result<Vec<u32>> {
        let Some(items) = given else {
            return Ok(self.default_params());
        };
        let mut out = Vec::new();
        for item in items.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
            let num = |s: &str| s.trim().parse::<u32>().map_err(|_| invalid(format!("bad parameter {s:?}")));
            match item.split_once("..") {
                Some((a, b)) => {
                    let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                    out.extend((a..=b).filter(|k| self != Maze::SpikedAnnulus || k % 2 == 0));
                }
                None => out.push(num(item)?),
            }
        }
        if out.is_empty() {
            return Err(invalid("empty parameter range"));
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn report(self, p: u32) -> Result<QhReport> {
        Ok(match self {
            Maze::SquareMaze => qh_square_maze(p)?,
            Maze::CircularMaze => qh_circular_maze(p)?,
            Maze::SpikedAnnulus => qh_spiked_annulus(p)?,
        })
    }
}

impl FemArgs {
    fn options(&self) -> Result<CapacityOptions> {
        let order = ElementOrder::from_degree(self.order).ok_or_else(|| invalid("order must be 1 or 2"))?;
        if self.levels == 0 {
            return Err(invalid("levels must be ≥ 1"));
        }
        if !(self.target >= 0.0) {
            return Err(invalid("target must be nonnegative"));
        }
        Ok(CapacityOptions {
            order,
            max_area: self.max_area,
            chord_tol: self.chord_tol,
            grading: None,
            levels: self.levels,
            target_rel_err: self.target,
            solver: SolveOptions {
                preconditioner: if self.jacobi { Preconditioner::Jacobi } else { Preconditioner::IncompleteCholesky },
                exec: if self.sequential { Execution::Sequential } else { Execution::Parallel },
                ..SolveOptions::default()
            },
        })
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "order": self.order,
            "levels": self.levels,
            "target": self.target,
            "max_area": self.max_area,
            "chord_tol": self.chord_tol,
            "jacobi": self.jacobi,
            "sequential": self.sequential,
        })
    }
}

pub fn run(cli: Cli, args: Vec<String>) -> Result<u8> {
    let out = cli.out_dir;
    match cli.command {
        Command::Generate { output, family } => generate(&out, args, family, output),
        Command::Qh { family, params } => qh(&out, args, family, &params),
        Command::Capacity { spec, fem } => cmd_capacity(&out, args, &spec, &fem),
        Command::Study { study } => match study {
            Study::Rates { family, params, fem } => rates(&out, args, family, &params, &fem, false),
            Study::QhError { family, params, fem } => rates(&out, args, family, &params, &fem, true),
            Study::Defeature { n, rho, cuts, fem } => defeature(&out, args, n, rho, cuts, &fem),
        },
        Command::MapTriangle { theta, samples } => map_triangle(&out, args, theta, samples),
        Command::Replay { manifest } => replay(&out, &manifest),
    }
}

/// Re-parses the arguments stored in a manifest and runs them into `out`.
fn replay(out: &Path, manifest: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("parsing manifest")?;
    let args: Vec<String> = serde_json::from_value(value["args"].clone()).context("manifest args")?;
    use clap::Parser;
    let mut cli = Cli::try_parse_from(std::iter::once("condenser".to_string()).chain(args.iter().cloned()))
        .map_err(|e| invalid(format!("manifest args do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(invalid("manifest records a replay"));
    }
    cli.out_dir = out.to_path_buf();
    run(cli, args)
}

fn spec_label(spec: &CondenserSpec) -> String {
    let p = &spec.params;
    match spec.family {
        Family::SquareMaze | Family::CircularMaze => format!("m{}", p.m.unwrap_or(0)),
        Family::SpikedAnnulus => format!("M{}", p.spikes.unwrap_or(0)),
        Family::TangentDisks => {
            format!("n{}_rho{}_s{}", p.n.unwrap_or(0), p.rho.unwrap_or(0.0), p.cut_radius.unwrap_or(0.0))
        }
        Family::Custom => match (p.r0, p.r1) {
            (Some(a), Some(b)) => format!("r{a}_{b}"),
            _ => "custom".into(),
        },
    }
}

fn build(family: &FamilyArgs) -> Result<CondenserSpec> {
    Ok(match *family {
        FamilyArgs::SquareMaze { m } => build_square_maze(m)?,
        FamilyArgs::CircularMaze { m } => build_circular_maze(m)?,
        FamilyArgs::SpikedAnnulus { spikes } => build_spiked_annulus(SpikedAnnulusParams::with_spikes(spikes))?,
        FamilyArgs::TangentDisks { n, rho, cut } => build_tangent_disks(TangentDisksParams { n, rho, cut_radius: cut })?,
        FamilyArgs::Annulus { r0, r1 } => concentric_annulus(r0, r1)?,
    })
}

fn generate(out: &Path, args: Vec<String>, family: FamilyArgs, output: Option<PathBuf>) -> Result<u8> {
    let spec = build(&family)?;
    let diag = validate_spec(&spec);
    let report = serde_json::to_string_pretty(&diag)?;
    stdout(&(report + "\n"));
    if !diag.valid {
        return Err(invalid("generated spec fails validation"));
    }
    let mut manifest = RunManifest::new("generate", args, json!({ "family": spec.family, "params": spec.params }));
    let path = output.unwrap_or_else(|| out.join(format!("{}_{}.json", spec.family.name(), spec_label(&spec))));
    let (dir, name) = split_path(&path);
    manifest.emit(&dir, &name, &spec.to_json())?;
    eprintln!("wrote {} (clearance {:e})", path.display(), diag.clearance);
    manifest.finish(out, 0)?;
    Ok(0)
}

fn split_path(path: &Path) -> (PathBuf, String) {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (dir, name)
}

fn qh(out: &Path, args: Vec<String>, family: Maze, params: &Option<Vec<String>>) -> Result<u8> {
    let params = family.params(params)?;
    let mut manifest = RunManifest::new("qh", args, json!({ "family": family.family(), "params": params }));
    let clock = Instant::now();
    let mut csv = String::from(QhReport::csv_header());
    csv.push('\n');
    for &p in &params {
        csv.push_str(&family.report(p)?.csv_row());
        csv.push('\n');
    }
    manifest.time("qh", clock.elapsed().as_secs_f64());
    stdout(&csv);
    manifest.emit(out, &format!("qh_{}.csv", family.family().name()), &csv)?;
    manifest.finish(out, 0)?;
    Ok(0)
}

/// Closed-form QH length and perimeter of the maze families.
fn closed_qh(spec: &CondenserSpec) -> Option<(f64, f64)> {
    let l = match spec.family {
        Family::SquareMaze => qh_square_maze_closed(spec.params.m?),
        Family::CircularMaze => qh_circular_maze_closed(spec.params.m?),
        Family::SpikedAnnulus if spec.params.r0 == Some(0.25) => qh_spiked_annulus_closed(spec.params.spikes?),
        _ => return None,
    };
    Some((l, 2.0 * l))
}

/// The result without its wall-clock timings, which go to the manifest.
fn stable(result: &CapacityResult, manifest: &mut RunManifest) -> CapacityResult {
    let t = result.timings;
    for (what, s) in [("mesh", t.mesh), ("assembly", t.assembly), ("solve", t.solve), ("energy", t.energy)] {
        manifest.time(what, s);
    }
    CapacityResult { timings: Timings::default(), ..result.clone() }
}

fn cmd_capacity(out: &Path, args: Vec<String>, path: &Path, fem: &FemArgs) -> Result<u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let spec = CondenserSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let opts = fem.options()?;
    let mut manifest =
        RunManifest::new("capacity", args, json!({ "spec": path, "family": spec.family, "options": fem.to_json() }));
    let result = capacity(&spec, &opts)?;
    let result = stable(&result, &mut manifest);
    let stem = format!("capacity_{}_{}", spec.family.name(), spec_label(&spec));
    manifest.emit(out, &format!("{stem}.json"), &(result.to_json() + "\n"))?;
    let row = result.csv_row(&spec_label(&spec), closed_qh(&spec));
    manifest.emit(out, &format!("{stem}.csv"), &format!("{}\n{row}\n", CapacityResult::csv_header()))?;
    stdout(&format!(
        "capacity {:?} (estimated relative error {:.1e}, {} dofs, {})\n",
        result.value,
        result.est_rel_error,
        result.dofs,
        if result.converged { "target reached" } else { "target not reached" }
    ));
    let code = if result.converged { 0 } else { EXIT_TOLERANCE };
    manifest.finish(out, code)?;
    Ok(code)
}

fn fit_json(fit: Option<&RateFit>, refused: Option<String>) -> serde_json::Value {
    match fit {
        Some(f) => json!({ "slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared, "points": f.points }),
        None => json!({ "refused": refused.unwrap_or_default() }),
    }
}

fn rates(
    out: &Path,
    args: Vec<String>,
    family: Maze,
    params: &Option<Vec<String>>,
    fem: &FemArgs,
    qh_error: bool,
) -> Result<u8> {
    let params = family.params(params)?;
    if params.len() < 3 {
        return Err(FemError::TooFewPoints(params.len()).into());
    }
    let opts = fem.options()?;
    let kind = if qh_error { "qh_error" } else { "rates" };
    let mut manifest = RunManifest::new(
        &format!("study-{}", kind.replace('_', "-")),
        args,
        json!({ "family": family.family(), "params": params, "options": fem.to_json() }),
    );
    let study: ConvergenceStudy = convergence_study(family.family(), &params, &opts)?;
    for c in &study.capacities {
        stable(c, &mut manifest);
    }
    let name = family.family().name();
    let stem = format!("{kind}_{name}");

    let mut csv = String::from("param,scale,capacity,est_rel_error,dofs,qh_perimeter,qh_rel_error\n");
    for (k, c) in study.capacities.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{:?},{:?},{:?},{},{:?},{:?}",
            study.params[k], study.scale[k], c.value, c.est_rel_error, c.dofs, study.qh_perimeters[k], study.qh_rel_errors[k]
        );
    }
    stdout(&csv);
    manifest.emit(out, &format!("{stem}.csv"), &csv)?;

    let (ys, fit, refused, y_label) = if qh_error {
        let refused = study.qh_fit.is_none().then(|| "a relative error vanished".to_string());
        (study.qh_rel_errors.clone(), study.qh_fit, refused, "|cap − QH perimeter| / cap")
    } else {
        let caps = study.capacities.iter().map(|c| c.value).collect();
        (caps, Some(study.capacity_fit), None, "capacity")
    };
    let mut summary = json!({ "study": kind, "family": family.family(), "x": "1/(2m)", "fit": fit_json(fit.as_ref(), refused) });
    if !qh_error {
        summary["rate"] = json!(study.rate());
    }
    manifest.emit(out, &format!("{stem}_fit.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    let plot = LogLogPlot {
        title: format!("{} {}", name.replace('_', " "), if qh_error { "QH perimeter gap" } else { "capacity" }),
        x_label: "1/(2m)".into(),
        y_label: y_label.into(),
        series: vec![Series { label: name.replace('_', " "), points: study.scale.iter().copied().zip(ys).collect() }],
        fits: fit
            .iter()
            .map(|f| FitLine { label: format!("slope {:.3}", f.slope), slope: f.slope, intercept: f.intercept })
            .collect(),
    };
    manifest.emit(out, &format!("{stem}.svg"), &plot.to_svg())?;
    let code = if study.capacities.iter().all(|c| c.converged) { 0 } else { EXIT_TOLERANCE };
    manifest.finish(out, code)?;
    Ok(code)
}

fn defeature(out: &Path, args: Vec<String>, n: u32, rho: f64, cuts: Option<Vec<f64>>, fem: &FemArgs) -> Result<u8> {
    let unit = rho * (PI / n as f64).cos();
    let cuts = cuts.unwrap_or_else(|| vec![unit / 32.0, unit / 16.0, unit / 8.0, unit / 4.0]);
    if cuts.is_empty() {
        return Err(invalid("no cut radii"));
    }
    let opts = fem.options()?;
    let mut manifest =
        RunManifest::new("study-defeature", args, json!({ "n": n, "rho": rho, "cuts": cuts, "options": fem.to_json() }));
    let clock = Instant::now();
    let points = defeature_study(n, rho, &cuts, &opts)?;
    manifest.time("study", clock.elapsed().as_secs_f64());

    let mut csv = String::from("s,capacity,reduction,est_rel_error\n");
    for p in &points {
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?}", p.cut_radius, p.capacity, p.reduction, p.est_rel_error);
    }
    stdout(&csv);
    manifest.emit(out, "defeature.csv", &csv)?;

    // only cut radii with a positive reduction can sit on log axes
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|p| p.cut_radius > 0.0 && p.reduction > 0.0).map(|p| (p.cut_radius, p.reduction)).unzip();
    let skipped = points.iter().filter(|p| p.cut_radius > 0.0).count() - xs.len();
    let (fit, refused) = match fit_loglog(&xs, &ys) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(format!("{e} ({skipped} cut radii without a positive reduction)"))),
    };
    if let Some(r) = &refused {
        eprintln!("fit refused: {r}");
    }
    let summary = json!({ "study": "defeature", "x": "s", "y": "reduction", "fit": fit_json(fit.as_ref(), refused) });
    manifest.emit(out, "defeature_fit.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    let plot = LogLogPlot {
        title: format!("tangent disks n = {n}, ρ = {rho}: capacity reduction"),
        x_label: "cut radius s".into(),
        y_label: "(cap(0) − cap(s)) / cap(0)".into(),
        series: vec![Series { label: "reduction".into(), points: xs.into_iter().zip(ys).collect() }],
        fits: fit
            .iter()
            .map(|f| FitLine { label: format!("slope {:.3}", f.slope), slope: f.slope, intercept: f.intercept })
            .collect(),
    };
    manifest.emit(out, "defeature.svg", &plot.to_svg())?;
    let code = if points.iter().all(|p| p.est_rel_error <= opts.target_rel_err) { 0 } else { EXIT_TOLERANCE };
    manifest.finish(out, code)?;
    Ok(code)
}

fn extended(e: Extended) -> (String, String) {
    match e.finite() {
        Some(w) => (format!("{:?}", w.re), format!("{:?}", w.im)),
        None => ("inf".into(), "inf".into()),
    }
}

fn map_triangle(out: &Path, args: Vec<String>, theta: f64, samples: usize) -> Result<u8> {
    let tri = arc_triangle(theta)?;
    let diag = verify_triangle_map(&tri, samples)?;
    let mut manifest = RunManifest::new("map-triangle", args, json!({ "theta": theta, "samples": samples }));
    let mut csv = String::from("side,t,z_re,z_im,w_re,w_im\n");
    for (name, side) in [("s1", &tri.s1), ("s2", &tri.s2), ("s3", &tri.s3)] {
        for k in 0..samples {
            let t = k as f64 / (samples - 1) as f64;
            let z = to_complex(side.point_at(t));
            let (re, im) = extended(map_triangle_to_halfplane(&tri, z)?);
            let _ = writeln!(csv, "{name},{t:?},{:?},{:?},{re},{im}", z.re, z.im);
        }
    }
    manifest.emit(out, "map_triangle.csv", &csv)?;
    let text = serde_json::to_string_pretty(&diag)? + "\n";
    stdout(&text);
    manifest.emit(out, "map_triangle.json", &text)?;
    let ok = diag.cusp_at_infinity && diag.max_deviation() <= MAP_TOL;
    let code = if ok { 0 } else { EXIT_TOLERANCE };
    manifest.finish(out, code)?;
    Ok(code)
}
