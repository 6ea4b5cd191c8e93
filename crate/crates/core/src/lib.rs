//! Geometry and analysis toolkit for planar domains with slits.
//!
//! The crate is organized around one pipeline: a polygonal domain with
//! zero-width slits ([`geom`]) is completed under its intrinsic metric
//! ([`metric`]), decomposed into Whitney cubes ([`whitney`]), and boundary
//! data on the split boundary is turned into a `C^2` extension field
//! ([`extension`]) by solving a minimum-seminorm Lipschitz selection problem
//! on the graph of intersecting cube pairs ([`selection`]).  The [`pipeline`]
//! module wires the stages together and runs finiteness checks over small
//! structured subsets of the pair graph.
//!
//! All distances, diameters and cube sizes use the uniform (max) norm; the
//! Euclidean norm appears only in orthogonal projections onto hyperplanes.

pub mod extension;
pub mod fields;
pub mod fixtures;
pub mod geom;
pub mod metric;
pub mod pipeline;
pub mod selection;
pub mod whitney;

pub use geom::{BoundarySample, Cube, Point, PolygonalDomain};
pub use metric::{IntrinsicMetric, SplitElement};
pub use whitney::{Flavor, WhitneyDecomposition};
