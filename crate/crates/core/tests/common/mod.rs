#![allow(dead_code)]

use std::cell::Cell as Counter;

use civd::decomposition::{Cell, CellKind, PathView, RecordEvent, RemovalObserver};
use civd::distance_tree::DistanceTree;
use civd::{AxisBox, Point, TAU};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform_points(n: usize, dim: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::from_fn(dim, |_| rng.gen_range(0.0..1.0))).collect()
}

/// Uniform sample from a cell region.
pub fn sample_in(cell: &Cell, rng: &mut ChaCha8Rng) -> Point {
    cell.region.sample(rng)
}

/// Exact bounding boxes of the distance-tree nodes' point sets.
pub struct NodeBoxes {
    pub lo: Vec<Point>,
    pub hi: Vec<Point>,
}

impl NodeBoxes {
    pub fn new(tree: &DistanceTree) -> Self {
        let dim = tree.dim();
        let m = tree.nodes.len();
        let mut lo = vec![Point::from_fn(dim, |_| f64::INFINITY); m];
        let mut hi = vec![Point::from_fn(dim, |_| f64::NEG_INFINITY); m];
        for v in 0..m {
            for &i in tree.points_of(v) {
                let p = &tree.points[i];
                for k in 0..dim {
                    let (l, h) = (lo[v].get(k).min(p.get(k)), hi[v].get(k).max(p.get(k)));
                    lo[v].set(k, l);
                    hi[v].set(k, h);
                }
            }
        }
        NodeBoxes { lo, hi }
    }

    /// Distance between an axis box and the node's bounding box.
    pub fn dist_to_box(&self, v: usize, bx: &AxisBox) -> f64 {
        let mut s = 0.0;
        for k in 0..bx.dim() {
            let gap = (self.lo[v].get(k) - bx.hi(k)).max(bx.lo(k) - self.hi[v].get(k)).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }

    /// Smallest and largest distance from `q` to the node's bounding box.
    pub fn dist_range(&self, v: usize, q: &Point) -> (f64, f64) {
        let (mut near, mut far) = (0.0, 0.0);
        for k in 0..q.dim() {
            let (l, h, x) = (self.lo[v].get(k), self.hi[v].get(k), q.get(k));
            let gap = (l - x).max(x - h).max(0.0);
            let reach = (x - l).abs().max((h - x).abs());
            near += gap * gap;
            far += reach * reach;
        }
        (near.sqrt(), far.sqrt())
    }
}

/// Exact distance from a box to the nearest input point, by branch and bound.
pub fn nearest_to_box(tree: &DistanceTree, boxes: &NodeBoxes, bx: &AxisBox) -> f64 {
    let mut best = f64::INFINITY;
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        if boxes.dist_to_box(v, bx) >= best {
            continue;
        }
        match tree.node(v).children {
            None => best = best.min(bx.dist_to_point(&tree.points[tree.points_of(v)[0]])),
            Some([a, b]) => {
                stack.push(a);
                stack.push(b);
            }
        }
    }
    best
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Path state for the streaming checks.
#[derive(Clone, Debug)]
pub struct PathCheck {
    /// Smallest recorded distance so far.
    pub min_x: f64,
    /// Lower bound on the distance from any later box to recorded points.
    pub lower: f64,
    /// Hash of recorded index ranges; matches the full range iff they tile it.
    pub tiling: u64,
}

impl Default for PathCheck {
    fn default() -> Self {
        PathCheck { min_x: f64::INFINITY, lower: f64::INFINITY, tiling: 0 }
    }
}

/// Observer checking the removal order on every event and preparing the
/// per-cell bounds.
pub struct Checker<'a> {
    pub tree: &'a DistanceTree,
    pub order_checks: Counter<u64>,
    pub order_violations: Counter<u64>,
}

impl<'a> Checker<'a> {
    pub fn new(tree: &'a DistanceTree) -> Self {
        Checker { tree, order_checks: Counter::new(0), order_violations: Counter::new(0) }
    }

    pub fn full_tiling(&self) -> u64 {
        splitmix(0).wrapping_sub(splitmix(self.tree.points.len() as u64))
    }
}

impl RemovalObserver for Checker<'_> {
    type State = PathCheck;

    fn on_record(&self, st: &mut PathCheck, e: &RecordEvent, _: u32) {
        let x = e.distance;
        if st.min_x.is_finite() {
            self.order_checks.set(self.order_checks.get() + 1);
            if x > (1.0 + self.tree.beta) * st.min_x {
                self.order_violations.set(self.order_violations.get() + 1);
            }
        }
        st.min_x = st.min_x.min(x);
        let nd = self.tree.node(e.node as usize);
        st.lower = st.lower.min(x - nd.s);
        st.tiling = st.tiling.wrapping_add(splitmix(nd.start as u64)).wrapping_sub(splitmix(nd.end as u64));
    }
}

/// Recorded distance-node ids of a type-2 cell's path.
pub fn recorded(path: PathView<'_>) -> Vec<RecordEvent> {
    path.to_vec()
}

/// `D(c) <= (2 beta / 3) dist(c, p)` for every input point, given a lower
/// bound on that distance; falls back to the exact nearest point when the
/// bound is inconclusive. Returns `(holds, used_fallback)`.
pub fn lemma4_holds(tree: &DistanceTree, boxes: &NodeBoxes, cell: &Cell, lower: f64) -> (bool, bool) {
    let bx = cell.region.outer();
    let d = cell.region.diameter();
    let limit = 2.0 * tree.beta / 3.0;
    if d <= limit * lower + TAU {
        return (true, false);
    }
    let exact = nearest_to_box(tree, boxes, bx);
    (d <= limit * exact + TAU, true)
}

/// Recorded node ranges tile `0..n` exactly.
pub fn partition_holds(tree: &DistanceTree, events: &[RecordEvent]) -> bool {
    let mut ranges: Vec<(usize, usize)> = events
        .iter()
        .map(|e| {
            let nd = tree.node(e.node as usize);
            (nd.start, nd.end)
        })
        .collect();
    ranges.sort_unstable();
    let mut at = 0;
    for (s, e) in ranges {
        if s != at {
            return false;
        }
        at = e;
    }
    at == tree.points.len()
}

/// Every recorded point lies within `[(1 - beta) x, (1 + beta) x]` of `q`.
/// Returns the number of violating points.
pub fn sandwich_violations(tree: &DistanceTree, boxes: &NodeBoxes, events: &[RecordEvent], q: &Point) -> usize {
    let beta = tree.beta;
    let mut bad = 0;
    for e in events {
        let v = e.node as usize;
        let (lo, hi) = ((1.0 - beta) * e.distance - TAU, (1.0 + beta) * e.distance + TAU);
        let (near, far) = boxes.dist_range(v, q);
        if near >= lo && far <= hi {
            continue;
        }
        bad += tree
            .points_of(v)
            .iter()
            .filter(|&&i| {
                let r = tree.points[i].dist(q);
                r < lo || r > hi
            })
            .count();
    }
    bad
}

/// `|q - l(v)| / |q - p'| <= beta / domination` over all points outside
/// the dominating node. Returns the worst ratio.
pub fn domination_ratio(tree: &DistanceTree, cell: &Cell, q: &Point) -> f64 {
    let CellKind::Type1 { node } = cell.kind else { panic!("not a type-1 cell") };
    let v = node as usize;
    let near = q.dist(tree.rep(v));
    let inside = tree.points_of(v);
    let mut mark = vec![false; tree.points.len()];
    for &i in inside {
        mark[i] = true;
    }
    let nearest_out = (0..tree.points.len())
        .filter(|&i| !mark[i])
        .map(|i| tree.points[i].dist(q))
        .fold(f64::INFINITY, f64::min);
    near / nearest_out
}

/// Distance from `q` to the nearest input point outside node `v`.
pub fn nearest_outside(tree: &DistanceTree, boxes: &NodeBoxes, v: usize, q: &Point) -> f64 {
    let (vs, ve) = (tree.node(v).start, tree.node(v).end);
    let mut best = f64::INFINITY;
    let mut stack = vec![tree.root()];
    while let Some(w) = stack.pop() {
        let nd = tree.node(w);
        if (nd.start >= vs && nd.end <= ve) || boxes.dist_range(w, q).0 >= best {
            continue;
        }
        match nd.children {
            None => best = best.min(q.dist(&tree.points[tree.points_of(w)[0]])),
            Some([a, b]) => {
                stack.push(a);
                stack.push(b);
            }
        }
    }
    best
}
