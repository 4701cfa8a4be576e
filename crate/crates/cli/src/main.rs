//! `condenser`: generate condenser specs, tabulate quasihyperbolic lengths,
//! compute capacities and run the convergence studies.
//!
//! Exit codes: 0 success, 2 target tolerance not reached, 3 invalid input,
//! 4 numerical failure, 1 anything else (for instance an unwritable output
//! directory).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use condenser_core::conformal::ConformalError;
use condenser_core::fem::FemError;
use condenser_core::geometry::GeometryError;
use condenser_core::mesh::MeshError;
use condenser_core::metrics::MetricsError;

pub const EXIT_TOLERANCE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "condenser", version, about = "Capacity of maze-like condensers")]
pub struct Cli {
    /// Directory for all written files.
    #[arg(long, global = true, env = "CONDENSER_OUT_DIR", default_value = "condenser-out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a condenser spec file and print its diagnostics.
    Generate {
        /// Spec path; defaults to `<out-dir>/<family>_<params>.json`.
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
        #[command(subcommand)]
        family: FamilyArgs,
    },
    /// Closed-form quasihyperbolic length and perimeter against the numeric oracle.
    Qh {
        family: Maze,
        /// Comma separated values or inclusive ranges such as `7..14`.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<String>>,
    },
    /// Capacity of the condenser in a spec file.
    Capacity {
        spec: PathBuf,
        #[command(flatten)]
        fem: FemArgs,
    },
    /// Parameter sweeps with a log-log fit and plot.
    Study {
        #[command(subcommand)]
        study: Study,
    },
    /// Check the map of the circular-arc triangle onto the upper half-plane.
    MapTriangle {
        /// Angle in radians, in (0, π/6].
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_6)]
        theta: f64,
        /// Sample points per side.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Run the command recorded in a manifest again, writing into `--out-dir`.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand, Debug, Clone)]
pub enum FamilyArgs {
    SquareMaze {
        #[arg(long)]
        m: u32,
    },
    CircularMaze {
        #[arg(long)]
        m: u32,
    },
    SpikedAnnulus {
        /// Number of spikes (even, at least 6).
        #[arg(long = "M", visible_alias = "spikes")]
        spikes: u32,
    },
    TangentDisks {
        #[arg(long, default_value_t = 6)]
        n: u32,
        /// Radius of the circle through the disk centres.
        #[arg(long, default_value_t = 0.6)]
        rho: f64,
        /// Radius of the cuts around the contact points.
        #[arg(long, default_value_t = 0.0)]
        cut: f64,
    },
    /// Concentric annulus r0 < |z| < r1, the benchmark with known capacity.
    Annulus {
        #[arg(long, default_value_t = 0.25)]
        r0: f64,
        #[arg(long, default_value_t = 1.0)]
        r1: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Maze {
    SquareMaze,
    CircularMaze,
    SpikedAnnulus,
}

#[derive(Subcommand, Debug)]
pub enum Study {
    /// Capacity growth against the feature scale 1/(2m).
    Rates {
        family: Maze,
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<String>>,
        #[command(flatten)]
        fem: FemArgs,
    },
    /// Relative gap between capacity and quasihyperbolic perimeter.
    QhError {
        #[arg(default_value = "circular-maze")]
        family: Maze,
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<String>>,
        #[command(flatten)]
        fem: FemArgs,
    },
    /// Capacity of the tangent-disk condenser as the cusps are cut away.
    Defeature {
        #[arg(long, default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 0.6)]
        rho: f64,
        /// Increasing cut radii; defaults to 1/32, 1/16, 1/8, 1/4 of the
        /// contact-point radius.
        #[arg(long, value_delimiter = ',')]
        cuts: Option<Vec<f64>>,
        #[command(flatten)]
        fem: FemArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct FemArgs {
    /// Lagrange element order, 1 or 2.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    /// Number of nested mesh levels.
    #[arg(long, default_value_t = 2)]
    pub levels: u32,
    /// Target relative error of the capacity.
    #[arg(long, default_value_t = 1e-3)]
    pub target: f64,
    /// Maximum triangle area of the base mesh; defaults to clearance².
    #[arg(long)]
    pub max_area: Option<f64>,
    /// Boundary chord tolerance; defaults to clearance / 20.
    #[arg(long)]
    pub chord_tol: Option<f64>,
    /// Jacobi instead of incomplete Cholesky preconditioning.
    #[arg(long)]
    pub jacobi: bool,
    /// Single-threaded run.
    #[arg(long)]
    pub sequential: bool,
}

/// Invalid user input that is not covered by a library error type.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn mesh_code(e: &MeshError) -> (u8, &'static str) {
    match e {
        MeshError::InvalidSpec(_)
        | MeshError::ChordTooCoarse { .. }
        | MeshError::CrossingConstraints
        | MeshError::InvalidParameter(_)
        | MeshError::Format(_) => (EXIT_INVALID, "invalid input"),
        _ => (EXIT_NUMERICAL, "mesh failure"),
    }
}

/// Exit code and a short category for an error chain.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<FemError>() {
            return match e {
                FemError::Mesh(m) => mesh_code(m),
                _ if e.is_input_error() => (EXIT_INVALID, "invalid input"),
                FemError::NotConverged { .. } => (EXIT_NUMERICAL, "solver budget exhausted"),
                _ => (EXIT_NUMERICAL, "solver failure"),
            };
        }
        if let Some(e) = cause.downcast_ref::<MeshError>() {
            return mesh_code(e);
        }
        if let Some(e) = cause.downcast_ref::<MetricsError>() {
            return match e {
                MetricsError::QuadratureFailed { .. } => (EXIT_NUMERICAL, "quadrature failure"),
                _ => (EXIT_INVALID, "invalid input"),
            };
        }
        if cause.is::<GeometryError>()
            || cause.is::<ConformalError>()
            || cause.is::<InvalidInput>()
            || cause.is::<serde_json::Error>()
        {
            return (EXIT_INVALID, "invalid input");
        }
    }
    (1, "error")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli, args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (code, kind) = classify(&err);
            eprintln!("error: {kind}: {err:#}");
            ExitCode::from(code)
        }
    }
}
