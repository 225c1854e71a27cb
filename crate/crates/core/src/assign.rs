//! Vector-model site assignment for type-2 cells.

use log::debug;

use crate::aggregation::{query_box_edge, AggregationTree, CoverQuery, FindStats};
use crate::error::{CivdError, Result};
use crate::geometry::Point;
use crate::hyperplane::max_resultant;
use crate::influence::InfluenceModel;

/// Aggregation nodes whose points form the cell's site.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorAssignment {
    pub nodes: Vec<u32>,
    pub cover: Vec<u32>,
    pub stats: FindStats,
    /// Set when the cover came back empty and the nearest point was used.
    pub fallback: bool,
}

/// Picks, among hyperplane sides of the effective cover around `q_c`, the
/// one with the largest multiset influence at `q_c`.
pub fn assign_vector(
    agg: &AggregationTree,
    model: &InfluenceModel,
    q_c: &Point,
    r_prime_min: f64,
) -> Result<VectorAssignment> {
    let t = model
        .t()
        .ok_or_else(|| CivdError::InvalidConfig("vector assignment needs the vector model".into()))?;
    q_c.check_dim(agg.dim)?;
    let edge = query_box_edge(model.delta_inv, t, agg.points.len(), r_prime_min);
    let query = CoverQuery::new(*q_c, edge, model.delta_inv);
    let (cover, stats) = agg.find(&query);
    if cover.is_empty() {
        let nearest = (0..agg.points.len())
            .min_by(|&a, &b| agg.points[a].dist(q_c).total_cmp(&agg.points[b].dist(q_c)))
            .ok_or(CivdError::EmptyInput)?;
        debug!("empty effective cover at {q_c:?}; using nearest point {nearest}");
        let leaf = agg.leaf_of[nearest];
        return Ok(VectorAssignment { nodes: vec![leaf], cover: Vec::new(), stats, fallback: true });
    }
    let forces: Vec<Point> = cover
        .iter()
        .map(|&v| {
            let nd = agg.node(v);
            let a = nd.l().sub(q_c);
            let r = a.norm();
            a.scale(nd.size() as f64 * r.powf(-t - 1.0))
        })
        .collect();
    let (mask, _) = max_resultant(&forces)?;
    let cover: Vec<u32> = cover.into_iter().map(|v| v as u32).collect();
    let nodes = cover.iter().zip(&mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
    Ok(VectorAssignment { nodes, cover, stats, fallback: false })
}
