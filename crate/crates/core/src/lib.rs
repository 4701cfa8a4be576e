//! Conformal capacity of maze-like condensers.
//!
//! The crate builds exact boundary descriptions of condenser families
//! ([`geometry`]), evaluates hyperbolic and quasihyperbolic quantities on them
//! ([`metrics`]), meshes the condenser domain ([`mesh`]) and computes the
//! capacity as the Dirichlet energy of the discrete potential ([`fem`]).
//! [`conformal`] holds the explicit map of a circular-arc triangle onto the
//! upper half-plane.
//!
//! Inner loops that are data parallel (element assembly, sparse products,
//! parameter sweeps, quadrature over chain pieces) go through [`par`], which
//! uses rayon when the `parallel` feature is enabled and falls back to plain
//! iterators otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod metrics;
pub mod par;

pub use geometry::{ArcSegment, Chain, CondenserSpec, Family, Point};
pub use par::Execution;
