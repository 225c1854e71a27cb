//! JSON document holding a built diagram.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregationTree;
use crate::civd::{Answer, BuildOptions, Civd, Site};
use crate::decomposition::{BoxTree, DecompositionStats};
use crate::distance_tree::DistanceTree;
use crate::error::{CivdError, Result};
use crate::geometry::Point;
use crate::influence::InfluenceModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub model: InfluenceModel,
    pub n: usize,
    pub dim: usize,
    pub beta: f64,
    pub delta_inv: f64,
    pub domination: f64,
    pub seed: Option<u64>,
    pub stats: DecompositionStats,
    pub build_seconds: f64,
    /// False when the cell list exceeded the cap and queries re-derive cells.
    pub materialized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub meta: Meta,
    pub distance_tree: DistanceTree,
    pub box_tree: Option<BoxTree>,
    /// Site of each cell of `box_tree`, in cell order.
    pub cells: Option<Vec<Site>>,
    pub aggregation_tree: Option<AggregationTree>,
}

impl Artifact {
    /// Builds the diagram and, when it has at most `cell_cap` box nodes,
    /// materializes and assigns every cell.
    pub fn build(
        points: &[Point],
        model: InfluenceModel,
        opts: BuildOptions,
        cell_cap: usize,
        seed: Option<u64>,
    ) -> Result<Self> {
        let start = std::time::Instant::now();
        let civd = Civd::build(points, model, opts)?;
        let (box_tree, cells, stats) = match civd.box_tree(Some(cell_cap)) {
            Ok(bt) => {
                let sites = civd.assign_all(&bt)?;
                let stats = bt.stats;
                (Some(bt), Some(sites), stats)
            }
            Err(CivdError::TooManyCells(_)) => {
                log::info!("more than {cell_cap} box nodes; storing the diagram without its cell list");
                (None, None, civd.for_each_cell(None, |_, _| {})?)
            }
            Err(e) => return Err(e),
        };
        let meta = Meta {
            model,
            n: civd.n(),
            dim: civd.dim(),
            beta: civd.beta(),
            delta_inv: model.delta_inv,
            domination: civd.domination,
            seed,
            stats,
            build_seconds: start.elapsed().as_secs_f64(),
            materialized: box_tree.is_some(),
        };
        let Civd { tree, aggregation, .. } = civd;
        Ok(Artifact { meta, distance_tree: tree, box_tree, cells, aggregation_tree: aggregation })
    }

    pub fn civd(&self) -> Civd {
        Civd {
            model: self.meta.model,
            tree: self.distance_tree.clone(),
            domination: self.meta.domination,
            aggregation: self.aggregation_tree.clone(),
        }
    }

    pub fn query(&self, civd: &Civd, q: &Point) -> Result<Answer> {
        match (&self.box_tree, &self.cells) {
            (Some(bt), Some(sites)) => civd.query_materialized(bt, sites, q),
            _ => civd.query(q),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| CivdError::InvalidConfig(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CivdError::InvalidConfig(e.to_string()))
    }
}
