//! Density clusters from the record sequence of a type-2 cell.

use crate::decomposition::{Cell, CellKind, DensityMark, PathView, RecordEvent, RemovalObserver};
use crate::distance_tree::DistanceTree;
use crate::error::{CivdError, Result};
use crate::influence::unit_ball_inverse_volume;

/// Tracks `D = c_d (n - M) / r^d` at each removal and keeps its running maximum.
#[derive(Clone, Copy, Debug)]
pub struct DensityObserver {
    pub n: usize,
    pub dim: usize,
    c_d: f64,
}

impl DensityObserver {
    pub fn new(n: usize, dim: usize) -> Self {
        DensityObserver { n, dim, c_d: unit_ball_inverse_volume(dim) }
    }

    pub fn value(&self, event: &RecordEvent) -> f64 {
        self.c_d * (self.n - event.points_before as usize) as f64 / event.distance.powi(self.dim as i32)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DensityPathState {
    pub best: Option<DensityMark>,
}

impl RemovalObserver for DensityObserver {
    type State = DensityPathState;

    fn on_record(&self, state: &mut DensityPathState, event: &RecordEvent, event_id: u32) {
        let value = self.value(event);
        if state.best.is_none_or(|b| value > b.value) {
            state.best = Some(DensityMark {
                event: event_id,
                node: event.node,
                position: event.position,
                value,
                box_node: event.box_node,
            });
        }
    }

    fn mark(&self, state: &DensityPathState) -> Option<DensityMark> {
        state.best
    }
}

/// The densest-cluster estimate of a type-2 cell: every node recorded at or
/// after the marked event.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityCluster {
    pub mark: DensityMark,
    /// Distance-tree nodes of the suffix, in path order.
    pub nodes: Vec<u32>,
}

impl DensityCluster {
    pub fn size(&self, tree: &DistanceTree) -> usize {
        self.nodes.iter().map(|&v| tree.nodes[v as usize].size()).sum()
    }

    /// Input point indices of the cluster.
    pub fn points(&self, tree: &DistanceTree) -> Vec<usize> {
        self.nodes.iter().flat_map(|&v| tree.points_of(v as usize).iter().copied()).collect()
    }
}

/// Walks the cell's record sequence back to its density mark.
pub fn extract_cluster(cell: &Cell, path: PathView<'_>) -> Result<DensityCluster> {
    let CellKind::Type2 { mark, .. } = cell.kind else {
        return Err(CivdError::InvalidConfig("density clusters exist only for type-2 cells".into()));
    };
    let mark = mark.ok_or(CivdError::MissingObserver)?;
    let mut nodes = Vec::new();
    for (id, e) in path.iter_rev() {
        nodes.push(e.node);
        if id == mark.event {
            nodes.reverse();
            return Ok(DensityCluster { mark, nodes });
        }
    }
    Err(CivdError::MissingObserver)
}
