//! Bottom-up merge tree over the spanner edges.
//!
//! Leaf `i` holds input point `i`; internal nodes get ids `n..2n-1` in
//! creation order, so the root is the last node.

use serde::{Deserialize, Serialize};

use crate::error::{CivdError, Result};
use crate::geometry::{AxisBox, Point};
use crate::wspd::{build_spanner, build_wspd, SpannerEdge};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceNode {
    /// Upper bound on the diameter of the node's point set.
    pub s: f64,
    /// Index of the representative input point.
    pub l: usize,
    pub children: Option<[usize; 2]>,
    pub parent: Option<usize>,
    /// Range into [`DistanceTree::order`].
    pub start: usize,
    pub end: usize,
}

impl DistanceNode {
    pub fn size(&self) -> usize {
        self.end - self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTree {
    pub points: Vec<Point>,
    pub nodes: Vec<DistanceNode>,
    /// Point indices in leaf order; every node owns a contiguous range.
    pub order: Vec<usize>,
    pub beta: f64,
}

struct DisjointSets {
    parent: Vec<usize>,
    /// Tree node currently rooted at each set representative.
    top: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), top: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

impl DistanceTree {
    /// Builds the tree from the well-separated pair spanner of `points`.
    pub fn build(points: &[Point], beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(CivdError::Domain { what: "beta", value: beta });
        }
        let wspd = build_wspd(points)?;
        let edges = build_spanner(points, &wspd);
        Ok(Self::from_edges(points, &edges, beta))
    }

    /// Kruskal-style merge of `edges` in order of (weight, index).
    pub fn from_edges(points: &[Point], edges: &[SpannerEdge], beta: f64) -> Self {
        let n = points.len();
        let mut nodes: Vec<DistanceNode> = (0..n)
            .map(|i| DistanceNode { s: 0.0, l: i, children: None, parent: None, start: 0, end: 1 })
            .collect();
        let mut queue: Vec<usize> = (0..edges.len()).collect();
        queue.sort_by(|&a, &b| edges[a].weight.total_cmp(&edges[b].weight).then(a.cmp(&b)));
        let mut sets = DisjointSets::new(n);
        for &e in &queue {
            let (ra, rb) = (sets.find(edges[e].u), sets.find(edges[e].v));
            if ra == rb {
                continue;
            }
            let (v1, v2) = (sets.top[ra], sets.top[rb]);
            let id = nodes.len();
            let (n1, n2) = (nodes[v1].end - nodes[v1].start, nodes[v2].end - nodes[v2].start);
            let l = if n2 > n1 { nodes[v2].l } else { nodes[v1].l };
            nodes.push(DistanceNode {
                s: nodes[v1].s + nodes[v2].s + edges[e].weight,
                l,
                children: Some([v1, v2]),
                parent: None,
                start: 0,
                end: n1 + n2,
            });
            nodes[v1].parent = Some(id);
            nodes[v2].parent = Some(id);
            sets.parent[rb] = ra;
            sets.top[ra] = id;
        }
        assert_eq!(nodes.len(), 2 * n - 1, "spanner is not connected");
        // Sizes are in place; lay out leaf ranges top-down.
        let mut order = vec![0usize; n];
        let root = nodes.len() - 1;
        nodes[root].start = 0;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let start = nodes[v].start;
            match nodes[v].children {
                None => {
                    nodes[v].end = start + 1;
                    order[start] = v;
                }
                Some([a, b]) => {
                    let size_a = nodes[a].end - nodes[a].start;
                    let size_b = nodes[b].end - nodes[b].start;
                    nodes[a].start = start;
                    nodes[a].end = start + size_a;
                    nodes[b].start = start + size_a;
                    nodes[b].end = start + size_a + size_b;
                    nodes[v].end = start + size_a + size_b;
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        DistanceTree { points: points.to_vec(), nodes, order, beta }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, v: usize) -> &DistanceNode {
        &self.nodes[v]
    }

    /// Point indices of `P_v`.
    pub fn points_of(&self, v: usize) -> &[usize] {
        let nd = &self.nodes[v];
        &self.order[nd.start..nd.end]
    }

    pub fn rep(&self, v: usize) -> &Point {
        &self.points[self.nodes[v].l]
    }

    /// Guard box of edge `8 s / beta` around the representative.
    pub fn e_box(&self, v: usize) -> AxisBox {
        AxisBox::new(*self.rep(v), 8.0 * self.nodes[v].s / self.beta)
    }

    /// Analysis box of edge `4 s / beta` around the representative.
    pub fn e_prime_box(&self, v: usize) -> AxisBox {
        AxisBox::new(*self.rep(v), 4.0 * self.nodes[v].s / self.beta)
    }

    pub fn contains_point(&self, v: usize, point: usize) -> bool {
        let nd = &self.nodes[v];
        let pos = self.leaf_position(point);
        (nd.start..nd.end).contains(&pos)
    }

    /// Position of leaf `point` in [`DistanceTree::order`].
    pub fn leaf_position(&self, point: usize) -> usize {
        self.nodes[point].start
    }
}
