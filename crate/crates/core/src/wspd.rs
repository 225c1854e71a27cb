//! Well-separated pair decomposition over a fair-split tree, and the
//! spanner it induces.

use crate::error::{CivdError, Result};
use crate::geometry::{Point, MAX_DIM};

/// Separation constant of the decomposition.
pub const SEPARATION: f64 = 12.0;

#[derive(Clone, Debug)]
pub struct SplitNode {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
    /// Range into [`FairSplitTree::perm`].
    pub start: usize,
    pub end: usize,
    pub children: Option<(usize, usize)>,
    /// Index of the lexicographically smallest point below this node.
    pub rep: usize,
}

impl SplitNode {
    fn radius(&self, dim: usize) -> f64 {
        let mut acc = 0.0;
        for k in 0..dim {
            let h = 0.5 * (self.hi[k] - self.lo[k]);
            acc += h * h;
        }
        acc.sqrt()
    }

    fn center(&self, dim: usize) -> Point {
        Point::from_fn(dim, |k| 0.5 * (self.lo[k] + self.hi[k]))
    }

    fn longest_side(&self, dim: usize) -> (usize, f64) {
        (0..dim)
            .map(|k| (k, self.hi[k] - self.lo[k]))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    }
}

/// Binary space partition splitting each bounding box across its longest side.
#[derive(Clone, Debug)]
pub struct FairSplitTree {
    pub nodes: Vec<SplitNode>,
    pub perm: Vec<usize>,
    pub dim: usize,
}

impl FairSplitTree {
    pub fn build(points: &[Point]) -> Result<Self> {
        let dim = validate_points(points)?;
        let n = points.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut nodes = vec![bounded_node(points, &perm, 0, n, dim)];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let (start, end) = (nodes[id].start, nodes[id].end);
            if end - start < 2 {
                continue;
            }
            let (axis, _) = nodes[id].longest_side(dim);
            let mid = 0.5 * (nodes[id].lo[axis] + nodes[id].hi[axis]);
            let slice = &mut perm[start..end];
            let mut split = partition(slice, |&i| points[i].get(axis) < mid);
            if split == 0 || split == slice.len() {
                slice.sort_by(|&a, &b| points[a].get(axis).total_cmp(&points[b].get(axis)));
                split = slice.len() / 2;
            }
            let left = nodes.len();
            nodes.push(bounded_node(points, &perm, start, start + split, dim));
            nodes.push(bounded_node(points, &perm, start + split, end, dim));
            nodes[id].children = Some((left, left + 1));
            stack.push(left);
            stack.push(left + 1);
        }
        for id in (0..nodes.len()).rev() {
            nodes[id].rep = match nodes[id].children {
                None => perm[nodes[id].start],
                Some((a, b)) => {
                    let (ra, rb) = (nodes[a].rep, nodes[b].rep);
                    if points[ra].lex_cmp(&points[rb]).is_le() {
                        ra
                    } else {
                        rb
                    }
                }
            };
        }
        Ok(FairSplitTree { nodes, perm, dim })
    }

    pub fn points_of(&self, node: usize) -> &[usize] {
        let n = &self.nodes[node];
        &self.perm[n.start..n.end]
    }

    fn well_separated(&self, a: usize, b: usize) -> bool {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let r = na.radius(self.dim).max(nb.radius(self.dim));
        let gap = na.center(self.dim).dist(&nb.center(self.dim)) - 2.0 * r;
        gap >= SEPARATION * r
    }
}

fn partition<T, F: FnMut(&T) -> bool>(slice: &mut [T], mut pred: F) -> usize {
    let mut k = 0;
    for i in 0..slice.len() {
        if pred(&slice[i]) {
            slice.swap(i, k);
            k += 1;
        }
    }
    k
}

fn bounded_node(points: &[Point], perm: &[usize], start: usize, end: usize, dim: usize) -> SplitNode {
    let mut lo = [f64::INFINITY; MAX_DIM];
    let mut hi = [f64::NEG_INFINITY; MAX_DIM];
    for &i in &perm[start..end] {
        for k in 0..dim {
            lo[k] = lo[k].min(points[i].get(k));
            hi[k] = hi[k].max(points[i].get(k));
        }
    }
    SplitNode { lo, hi, start, end, children: None, rep: perm[start] }
}

/// Checks a point set for consistent dimension, finiteness and distinctness.
/// Returns the dimension.
pub fn validate_points(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(CivdError::EmptyInput)?;
    let dim = first.dim();
    for p in points {
        p.check_dim(dim)?;
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].lex_cmp(&points[b]).then(a.cmp(&b)));
    for w in idx.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(CivdError::DuplicatePoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(dim)
}

/// A well-separated pair of fair-split tree nodes with their representatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WspdPair {
    pub a: usize,
    pub b: usize,
    pub rep_a: usize,
    pub rep_b: usize,
}

#[derive(Clone, Debug)]
pub struct Wspd {
    pub tree: FairSplitTree,
    pub pairs: Vec<WspdPair>,
}

impl Wspd {
    pub fn points_of(&self, node: usize) -> &[usize] {
        self.tree.points_of(node)
    }
}

/// Computes a well-separated pair decomposition with separation [`SEPARATION`].
pub fn build_wspd(points: &[Point]) -> Result<Wspd> {
    let tree = FairSplitTree::build(points)?;
    let mut pairs = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for node in &tree.nodes {
        if let Some((a, b)) = node.children {
            stack.push((a, b));
            while let Some((v, w)) = stack.pop() {
                if tree.well_separated(v, w) {
                    pairs.push(WspdPair { a: v, b: w, rep_a: tree.nodes[v].rep, rep_b: tree.nodes[w].rep });
                    continue;
                }
                let side = |x: usize| tree.nodes[x].longest_side(tree.dim).1;
                let (big, small) = if tree.nodes[w].children.is_none()
                    || (tree.nodes[v].children.is_some() && side(v) >= side(w))
                {
                    (v, w)
                } else {
                    (w, v)
                };
                let (l, r) = tree.nodes[big].children.expect("unseparated pair of leaves");
                stack.push((r, small));
                stack.push((l, small));
            }
        }
    }
    Ok(Wspd { tree, pairs })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpannerEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// One edge per pair, joining its representatives.
pub fn build_spanner(points: &[Point], wspd: &Wspd) -> Vec<SpannerEdge> {
    wspd.pairs
        .iter()
        .map(|p| SpannerEdge { u: p.rep_a, v: p.rep_b, weight: points[p.rep_a].dist(&points[p.rep_b]) })
        .collect()
}
