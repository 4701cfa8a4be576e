//! Laplace–Dirichlet solve for the condenser potential and the capacity as
//! its Dirichlet energy.
//!
//! Lagrange elements of order 1 or 2 on the meshes from [`crate::mesh`], a
//! preconditioned conjugate gradient solve, and nested uniform refinement
//! with Richardson extrapolation for the error estimate.

mod assemble;
mod capacity;
mod solve;
mod study;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::mesh::MeshError;

pub use assemble::{assemble, assemble_with, element_stiffness, CsrMatrix, DofMap, System};
pub use capacity::{capacity, richardson, CapacityOptions, CapacityResult, LevelRecord, Richardson, Timings};
pub use solve::{energy, energy_with, solve, PotentialField, Preconditioner, SolveOptions, SolveStats};
pub use study::{convergence_study, defeature_study, fit_loglog, ConvergenceStudy, DefeaturePoint, RateFit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ElementOrder {
    #[serde(rename = "1")]
    Linear,
    #[default]
    #[serde(rename = "2")]
    Quadratic,
}

impl ElementOrder {
    pub fn degree(self) -> u32 {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }

    pub fn from_degree(p: u32) -> Option<Self> {
        match p {
            1 => Some(ElementOrder::Linear),
            2 => Some(ElementOrder::Quadratic),
            _ => None,
        }
    }

    /// Local basis functions per triangle.
    pub fn local_dofs(self) -> usize {
        match self {
            ElementOrder::Linear => 3,
            ElementOrder::Quadratic => 6,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("invalid condenser: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("degenerate triangle {0}")]
    DegenerateElement(usize),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least 3 points for a rate fit, got {0}")]
    TooFewPoints(usize),
}

impl FemError {
    /// True for failures caused by the input rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            FemError::InvalidSpec(_)
                | FemError::Geometry(_)
                | FemError::InvalidParameter(_)
                | FemError::TooFewPoints(_)
                | FemError::Mesh(MeshError::InvalidSpec(_))
                | FemError::Mesh(MeshError::ChordTooCoarse { .. })
                | FemError::Mesh(MeshError::CrossingConstraints)
                | FemError::Mesh(MeshError::InvalidParameter(_))
        )
    }
}
