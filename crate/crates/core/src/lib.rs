//! Approximate clustering-induced Voronoi diagrams.
//!
//! Given `n` points in `R^d` and an influence function, the diagram
//! partitions space into cells whose points share an approximate maximum
//! influence cluster. Two influence models are provided: a force-like
//! vector model and a density model.

pub mod error;
pub mod geometry;
pub mod influence;
pub mod wspd;
pub mod distance_tree;
pub mod decomposition;
pub mod density;
pub mod aggregation;
pub mod hyperplane;
pub mod assign;
pub mod oracle;
pub mod civd;
pub mod artifact;

pub use error::{CivdError, Result};
pub use geometry::{AxisBox, Point, Region, MAX_DIM, TAU};
pub use influence::{InfluenceModel, InfluenceValue, ModelKind, WeightedSite};
