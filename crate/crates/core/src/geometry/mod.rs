//! Exact boundary descriptions of condensers `(Ω, K)`.
//!
//! Outer boundaries are lists of [`Chain`]s: closed chains bound area, open
//! chains are two-sided walls (slits). The compact set is either a curve or a
//! union of closed region loops.

mod arc_triangle;
mod families;
mod primitives;
mod spec;
mod validate;

pub use arc_triangle::{arc_triangle, cut_subarc, ArcTriangle};
pub use families::{
    build_circular_maze, build_spiked_annulus, build_square_maze, build_tangent_disks, circular_maze_gap,
    concentric_annulus, SpikedAnnulusParams, TangentDisksParams,
};
pub use primitives::{normalize_angle, ArcSegment, Chain, Orientation, Point, COINCIDENCE_TOL, MAX_PIECE_SWEEP};
pub use spec::{Compact, CondenserSpec, Family, FamilyParams, SPEC_VERSION};
pub use validate::{distance_to_boundary, validate_spec, Diagnostics, Violation};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid primitive: {0}")]
    InvalidPrimitive(String),
    #[error("chain junctions do not meet (gap {0:e})")]
    BrokenChain(f64),
    #[error("point ({x}, {y}) is not inside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("unsupported spec version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed spec document: {0}")]
    Parse(String),
}
