//! End-to-end diagram: decomposition plus per-cell site assignment.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregationTree;
use crate::assign::assign_vector;
use crate::decomposition::{
    BoxTree, Cell, CellKind, Decomposer, DecompositionStats, LazyLocation, Location, PathView,
};
use crate::density::{extract_cluster, DensityObserver};
use crate::distance_tree::DistanceTree;
use crate::error::{CivdError, Result};
use crate::geometry::Point;
use crate::influence::{InfluenceModel, ModelKind};

/// Site descriptor of a cell, by tree node ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "site", rename_all = "snake_case")]
pub enum Site {
    /// Points of a dominating distance-tree node.
    DistanceNode { node: u32 },
    /// Distance-tree nodes recorded from the density mark onward.
    RecordSuffix { event: u32, nodes: Vec<u32> },
    /// Aggregation-tree nodes chosen by the vector assignment.
    AggregationNodes { nodes: Vec<u32> },
    /// The whole input, for queries outside the decomposition.
    All,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Replaces the model's decomposition tolerance.
    pub beta: Option<f64>,
    /// Replaces the domination polynomial value.
    pub domination: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Civd {
    pub model: InfluenceModel,
    pub tree: DistanceTree,
    pub domination: f64,
    pub aggregation: Option<AggregationTree>,
}

/// Answer to a point query.
#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    pub site: Site,
    pub points: Vec<usize>,
    pub value: f64,
    pub cell: Option<Cell>,
}

impl Civd {
    pub fn build(points: &[Point], model: InfluenceModel, opts: BuildOptions) -> Result<Self> {
        let dim = crate::wspd::validate_points(points)?;
        if dim != model.dim {
            return Err(CivdError::DimensionMismatch { expected: model.dim, got: dim });
        }
        let beta = opts.beta.unwrap_or(model.beta);
        let tree = DistanceTree::build(points, beta)?;
        let domination = opts.domination.unwrap_or_else(|| model.domination_poly(points.len()));
        if !(domination >= 1.0 && domination.is_finite()) {
            return Err(CivdError::Domain { what: "domination", value: domination });
        }
        let aggregation = match model.kind {
            ModelKind::Vector { .. } => Some(AggregationTree::build(points)?),
            ModelKind::Density => None,
        };
        Ok(Civd { model, tree, domination, aggregation })
    }

    pub fn points(&self) -> &[Point] {
        &self.tree.points
    }

    pub fn n(&self) -> usize {
        self.tree.points.len()
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn beta(&self) -> f64 {
        self.tree.beta
    }

    fn density_observer(&self) -> DensityObserver {
        DensityObserver::new(self.n(), self.dim())
    }

    /// Finds the cell of `q` by expanding only the boxes on its path.
    pub fn locate(&self, q: &Point) -> Result<LazyLocation> {
        match self.model.kind {
            ModelKind::Density => {
                Decomposer::with_observer(&self.tree, self.domination, self.density_observer()).locate(q)
            }
            ModelKind::Vector { .. } => Decomposer::new(&self.tree, self.domination).locate(q),
        }
    }

    /// Streams every cell with its record path.
    pub fn for_each_cell<F>(&self, cap: Option<usize>, emit: F) -> Result<DecompositionStats>
    where
        F: FnMut(&Cell, PathView<'_>),
    {
        match self.model.kind {
            ModelKind::Density => Decomposer::with_observer(&self.tree, self.domination, self.density_observer())
                .for_each_cell(cap, emit),
            ModelKind::Vector { .. } => Decomposer::new(&self.tree, self.domination).for_each_cell(cap, emit),
        }
    }

    pub fn box_tree(&self, cap: Option<usize>) -> Result<BoxTree> {
        match self.model.kind {
            ModelKind::Density => BoxTree::build(
                &Decomposer::with_observer(&self.tree, self.domination, self.density_observer()),
                cap,
            ),
            ModelKind::Vector { .. } => BoxTree::build(&Decomposer::new(&self.tree, self.domination), cap),
        }
    }

    /// Site of a cell given its record path.
    pub fn site_for(&self, cell: &Cell, path: PathView<'_>) -> Result<Site> {
        match (cell.kind, self.model.kind) {
            (CellKind::Type1 { node }, _) => Ok(Site::DistanceNode { node }),
            (CellKind::Type2 { .. }, ModelKind::Density) => {
                let cluster = extract_cluster(cell, path)?;
                Ok(Site::RecordSuffix { event: cluster.mark.event, nodes: cluster.nodes })
            }
            (CellKind::Type2 { r_prime_min, .. }, ModelKind::Vector { .. }) => {
                let agg = self.aggregation.as_ref().ok_or(CivdError::MissingObserver)?;
                let q_c = cell.region.representative_point();
                let a = assign_vector(agg, &self.model, &q_c, r_prime_min)?;
                Ok(Site::AggregationNodes { nodes: a.nodes })
            }
        }
    }

    /// Input point indices of a site, sorted.
    pub fn site_points(&self, site: &Site) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = match site {
            Site::DistanceNode { node } => self.tree.points_of(*node as usize).to_vec(),
            Site::RecordSuffix { nodes, .. } => {
                nodes.iter().flat_map(|&v| self.tree.points_of(v as usize).iter().copied()).collect()
            }
            Site::AggregationNodes { nodes } => {
                let agg = self.aggregation.as_ref().ok_or(CivdError::MissingObserver)?;
                nodes.iter().flat_map(|&v| agg.points_of(v as usize).iter().map(|&i| i as usize)).collect()
            }
            Site::All => (0..self.n()).collect(),
        };
        out.sort_unstable();
        Ok(out)
    }

    /// Influence of a site's points at `q`.
    pub fn influence(&self, points: &[usize], q: &Point) -> Result<f64> {
        self.model.eval_points(points.iter().map(|&i| &self.tree.points[i]), q)
    }

    fn answer(&self, site: Site, cell: Option<Cell>, q: &Point) -> Result<Answer> {
        let points = self.site_points(&site)?;
        let value = self.influence(&points, q)?;
        Ok(Answer { site, points, value, cell })
    }

    /// Locates `q` lazily, assigns its cell and evaluates the site at `q`.
    pub fn query(&self, q: &Point) -> Result<Answer> {
        let loc = self.locate(q)?;
        let site = match &loc.cell {
            Some(cell) => self.site_for(cell, loc.path())?,
            None => Site::All,
        };
        self.answer(site, loc.cell, q)
    }

    /// Assigns every cell of a materialized box tree.
    pub fn assign_all(&self, boxes: &BoxTree) -> Result<Vec<Site>> {
        (0..boxes.cells.len()).map(|c| self.site_for(&boxes.cells[c], boxes.path(c))).collect()
    }

    /// Query against a materialized box tree and its sites.
    pub fn query_materialized(&self, boxes: &BoxTree, sites: &[Site], q: &Point) -> Result<Answer> {
        q.check_dim(self.dim())?;
        crate::decomposition::check_singular(self.points(), q)?;
        match boxes.locate(q) {
            Location::Cell(c) => self.answer(sites[c].clone(), Some(boxes.cells[c]), q),
            Location::Outside => self.answer(Site::All, None, q),
        }
    }
}
