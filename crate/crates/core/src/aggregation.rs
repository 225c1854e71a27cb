//! Shrink-wrapped quadtree over the input points, with i-paths and
//! majority-path search trees for fast effective-cover queries.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{smallest_enclosing_box, AxisBox, Point, MAX_DIM};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggNode {
    /// Hypercube around the node's points, kept inside `r_prime`.
    pub r: AxisBox,
    /// Quadtree sub-box of the parent that produced this node.
    pub r_prime: AxisBox,
    /// Orthant of `r_prime` inside the parent's `r`.
    pub label: u8,
    pub parent: u32,
    /// Child per orthant label, `u32::MAX` when the sub-box is empty.
    pub children: Vec<u32>,
    /// Range into [`AggregationTree::perm`].
    pub start: u32,
    pub end: u32,
    /// Number of tree nodes in the subtree.
    pub subtree: u32,
}

impl AggNode {
    pub fn size(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_leaf(&self) -> bool {
        self.end - self.start == 1
    }

    /// Edge length `S(v)`.
    pub fn s(&self) -> f64 {
        self.r.edge
    }

    /// Representative `L(v)`: the center of `R(v)`.
    pub fn l(&self) -> Point {
        self.r.center
    }

    pub fn child_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.children.iter().filter(|&&c| c != NONE).map(|&c| c as usize)
    }
}

/// Chains of the tree stored as arrays, with each node's position.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub nodes: Vec<u32>,
    /// `offsets[p]..offsets[p + 1]` is path `p` in `nodes`.
    pub offsets: Vec<u32>,
    /// Per tree node: (path id, position in path).
    pub refs: Vec<(u32, u32)>,
}

impl PathSet {
    pub fn path(&self, p: u32) -> &[u32] {
        &self.nodes[self.offsets[p as usize] as usize..self.offsets[p as usize + 1] as usize]
    }

    fn push_path(&mut self, path: &[u32]) {
        let id = self.offsets.len() as u32 - 1;
        for (pos, &v) in path.iter().enumerate() {
            self.refs[v as usize] = (id, pos as u32);
        }
        self.nodes.extend_from_slice(path);
        self.offsets.push(self.nodes.len() as u32);
    }
}

/// Majority-path decomposition with a weighted binary search tree per path.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MajorityPaths {
    pub paths: PathSet,
    /// Node weights: one plus the sizes of subtrees hanging off the path.
    pub weight: Vec<u32>,
    /// Search-tree links over path positions, indexed like `paths.nodes`.
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    /// Root position of each path's search tree.
    pub root: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregationTree {
    pub points: Vec<Point>,
    pub nodes: Vec<AggNode>,
    pub perm: Vec<u32>,
    /// One path set per orthant label.
    pub ipaths: Vec<PathSet>,
    pub majority: MajorityPaths,
    /// Leaf node of each input point.
    pub leaf_of: Vec<u32>,
    pub dim: usize,
}

/// Counters for the fast search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FindStats {
    /// Nodes processed by the main recursion.
    pub visits: usize,
    /// Nodes examined while skipping long paths.
    pub probes: usize,
}

impl FindStats {
    pub fn touched(&self) -> usize {
        self.visits + self.probes
    }
}

/// A query for an effective cover: the box `B` around `q_c` and the
/// smallness ratio `Delta^{-1}(epsilon) / (3d)`.
#[derive(Clone, Copy, Debug)]
pub struct CoverQuery {
    pub q_c: Point,
    pub b: AxisBox,
    pub ratio: f64,
}

impl CoverQuery {
    pub fn new(q_c: Point, edge: f64, delta_inv: f64) -> Self {
        let ratio = delta_inv / (3.0 * q_c.dim() as f64);
        CoverQuery { q_c, b: AxisBox::new(q_c, edge), ratio }
    }
}

/// Edge of the query box: `4 (1 + x) x^{-1/t} n^{1/t} r'_min` with `x = Delta^{-1}(epsilon)`.
pub fn query_box_edge(delta_inv: f64, t: f64, n: usize, r_prime_min: f64) -> f64 {
    4.0 * (1.0 + delta_inv) * delta_inv.powf(-1.0 / t) * (n as f64).powf(1.0 / t) * r_prime_min
}

impl AggregationTree {
    pub fn build(points: &[Point]) -> Result<Self> {
        let dim = crate::wspd::validate_points(points)?;
        let n = points.len();
        let arity = 1usize << dim;
        let root_box = smallest_enclosing_box(points.iter())?;
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut nodes = vec![AggNode {
            r: root_box,
            r_prime: root_box,
            label: 0,
            parent: NONE,
            children: vec![NONE; arity],
            start: 0,
            end: n as u32,
            subtree: 1,
        }];
        let mut stack = vec![0usize];
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); arity];
        while let Some(v) = stack.pop() {
            if nodes[v].is_leaf() {
                continue;
            }
            let r = nodes[v].r;
            let (start, end) = (nodes[v].start as usize, nodes[v].end as usize);
            for b in buckets.iter_mut() {
                b.clear();
            }
            for &i in &perm[start..end] {
                buckets[r.orthant_of(&points[i as usize])].push(i);
            }
            debug_assert!(buckets.iter().filter(|b| !b.is_empty()).count() >= 2);
            let mut at = start;
            for (o, bucket) in buckets.iter().enumerate() {
                if bucket.is_empty() {
                    continue;
                }
                perm[at..at + bucket.len()].copy_from_slice(bucket);
                let r_prime = r.child(o);
                let tight = smallest_enclosing_box(bucket.iter().map(|&i| &points[i as usize]))?;
                let id = nodes.len();
                nodes.push(AggNode {
                    r: tight.clamp_into(&r_prime),
                    r_prime,
                    label: o as u8,
                    parent: v as u32,
                    children: vec![NONE; arity],
                    start: at as u32,
                    end: (at + bucket.len()) as u32,
                    subtree: 1,
                });
                nodes[v].children[o] = id as u32;
                stack.push(id);
                at += bucket.len();
            }
        }
        // Children always follow their parent, so a reverse sweep sees them first.
        for v in (1..nodes.len()).rev() {
            let p = nodes[v].parent as usize;
            nodes[p].subtree += nodes[v].subtree;
        }
        let mut tree = AggregationTree {
            points: points.to_vec(),
            nodes,
            perm,
            ipaths: Vec::new(),
            majority: MajorityPaths::default(),
            leaf_of: vec![NONE; n],
            dim,
        };
        for v in 0..tree.nodes.len() {
            if tree.nodes[v].is_leaf() {
                let i = tree.perm[tree.nodes[v].start as usize];
                tree.leaf_of[i as usize] = v as u32;
            }
        }
        tree.ipaths = (0..arity).map(|i| tree.build_ipaths(i)).collect();
        tree.majority = tree.build_majority();
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, v: usize) -> &AggNode {
        &self.nodes[v]
    }

    pub fn points_of(&self, v: usize) -> &[u32] {
        let nd = &self.nodes[v];
        &self.perm[nd.start as usize..nd.end as usize]
    }

    fn build_ipaths(&self, label: usize) -> PathSet {
        let mut set = PathSet { nodes: Vec::new(), offsets: vec![0], refs: vec![(0, 0); self.nodes.len()] };
        let mut path = Vec::new();
        for v in 0..self.nodes.len() {
            let nd = &self.nodes[v];
            if nd.parent != NONE && nd.label as usize == label {
                continue;
            }
            path.clear();
            let mut cur = v as u32;
            while cur != NONE {
                path.push(cur);
                cur = self.nodes[cur as usize].children[label];
            }
            set.push_path(&path);
        }
        set
    }

    fn heavy_child(&self, v: usize) -> Option<usize> {
        // Largest subtree; the lowest label wins ties.
        self.nodes[v]
            .child_ids()
            .fold(None, |best: Option<usize>, c| match best {
                Some(b) if self.nodes[b].subtree >= self.nodes[c].subtree => Some(b),
                _ => Some(c),
            })
    }

    fn build_majority(&self) -> MajorityPaths {
        let m = self.nodes.len();
        let mut paths = PathSet { nodes: Vec::new(), offsets: vec![0], refs: vec![(0, 0); m] };
        let mut weight = vec![0u32; m];
        let mut heads = vec![0usize];
        let mut path = Vec::new();
        while let Some(h) = heads.pop() {
            path.clear();
            let mut cur = Some(h);
            while let Some(v) = cur {
                path.push(v as u32);
                let heavy = self.heavy_child(v);
                let mut w = 1;
                for c in self.nodes[v].child_ids() {
                    if Some(c) != heavy {
                        w += self.nodes[c].subtree;
                        heads.push(c);
                    }
                }
                weight[v] = w;
                cur = heavy;
            }
            paths.push_path(&path);
        }
        let total = paths.nodes.len();
        let mut left = vec![NONE; total];
        let mut right = vec![NONE; total];
        let mut root = Vec::with_capacity(paths.offsets.len() - 1);
        for p in 0..paths.offsets.len() - 1 {
            let base = paths.offsets[p] as usize;
            let ws: Vec<u64> =
                paths.path(p as u32).iter().map(|&v| u64::from(weight[v as usize])).collect();
            let r = weighted_bst(&ws, &mut left[base..base + ws.len()], &mut right[base..base + ws.len()]);
            root.push(r);
        }
        MajorityPaths { paths, weight, left, right, root }
    }

    /// Last node of a root-monotone chain predicate, starting from a node
    /// known to satisfy it. At most one child of a satisfying node may
    /// satisfy it as well.
    pub fn find_tail<F>(&self, start: usize, mut pred: F, probes: &mut usize) -> usize
    where
        F: FnMut(usize) -> bool,
    {
        let mp = &self.majority;
        let mut cur = start;
        loop {
            let (pid, pos0) = mp.paths.refs[cur];
            let base = mp.paths.offsets[pid as usize] as usize;
            let path = mp.paths.path(pid);
            let mut best = pos0;
            let mut b = mp.root[pid as usize];
            while b != NONE {
                let go_right = if b <= pos0 {
                    true
                } else {
                    *probes += 1;
                    pred(path[b as usize] as usize)
                };
                if go_right {
                    best = best.max(b);
                    b = mp.right[base + b as usize];
                } else {
                    b = mp.left[base + b as usize];
                }
            }
            let w = path[best as usize] as usize;
            let heavy = path.get(best as usize + 1).map(|&x| x as usize);
            let mut next = None;
            for c in self.nodes[w].child_ids() {
                if Some(c) == heavy {
                    continue;
                }
                *probes += 1;
                if pred(c) {
                    next = Some(c);
                    break;
                }
            }
            match next {
                Some(c) => cur = c,
                None => return w,
            }
        }
    }

    fn intersects(&self, v: usize, q: &CoverQuery) -> bool {
        self.nodes[v].r.intersects_closed(&q.b)
    }

    fn small(&self, v: usize, q: &CoverQuery) -> bool {
        let nd = &self.nodes[v];
        nd.s() <= q.q_c.dist(&nd.l()) * q.ratio
    }

    /// Number of quadtree sub-boxes of `R(v)` met by `B`, capped at 2.
    fn split_count(&self, v: usize, q: &CoverQuery) -> usize {
        let r = &self.nodes[v].r;
        let mut count = 1usize;
        for k in 0..self.dim {
            let c = r.center.get(k);
            let lo = q.b.lo(k).max(r.lo(k));
            let hi = q.b.hi(k).min(r.hi(k));
            if lo <= c && c <= hi {
                count = 2;
            }
        }
        count
    }

    fn splittable(&self, v: usize, q: &CoverQuery) -> bool {
        !self.nodes[v].is_leaf() && self.split_count(v, q) >= 2
    }

    fn touches(&self, v: usize, q: &CoverQuery) -> bool {
        self.nodes[v].r_prime.intersects_closed(&q.b)
    }

    /// Meets `B`, is not small and has exactly one sub-box meeting `B`.
    fn pass_through(&self, v: usize, q: &CoverQuery) -> bool {
        self.intersects(v, q) && !self.small(v, q) && !self.splittable(v, q)
    }

    /// Reference search: visits nodes one at a time, walking long
    /// non-splittable chains step by step.
    pub fn slow_find(&self, q: &CoverQuery) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(mut v) = stack.pop() {
            loop {
                if !self.intersects(v, q) {
                    break;
                }
                if self.small(v, q) {
                    out.push(v);
                    break;
                }
                if self.splittable(v, q) {
                    for c in self.nodes[v].child_ids().collect::<Vec<_>>().into_iter().rev() {
                        if self.touches(c, q) {
                            stack.push(c);
                        }
                    }
                    break;
                }
                let r = &self.nodes[v].r;
                let Some(o) = (0..1usize << self.dim).find(|&o| r.child(o).intersects_closed(&q.b)) else {
                    break;
                };
                match self.nodes[v].children[o] {
                    NONE => break,
                    c => v = c as usize,
                }
            }
        }
        out
    }

    /// Effective cover with long chains skipped by path searches.
    pub fn find(&self, q: &CoverQuery) -> (Vec<usize>, FindStats) {
        let mut stats = FindStats::default();
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            stats.visits += 1;
            if !self.intersects(v, q) {
                continue;
            }
            if self.small(v, q) {
                out.push(v);
                continue;
            }
            if self.splittable(v, q) {
                for c in self.nodes[v].child_ids().collect::<Vec<_>>().into_iter().rev() {
                    stats.probes += 1;
                    if self.touches(c, q) {
                        stack.push(c);
                    }
                }
                continue;
            }
            if let Some(next) = self.skip_chain(v, q, &mut stats.probes) {
                stack.push(next);
            }
        }
        (out, stats)
    }

    /// From a pass-through node, returns the first node below it on its
    /// chain that is not pass-through, or `None` if the chain runs out.
    fn skip_chain(&self, start: usize, q: &CoverQuery, probes: &mut usize) -> Option<usize> {
        let mut cur = start;
        loop {
            let r = self.nodes[cur].r;
            // Face of B spanned by the edges of B lying inside R(cur).
            let mut face_lo = [0.0; MAX_DIM];
            let mut face_hi = [0.0; MAX_DIM];
            let mut contained = false;
            let mut label = 0usize;
            for k in 0..self.dim {
                let (bl, bh) = (q.b.lo(k), q.b.hi(k));
                if bl >= r.lo(k) && bh <= r.hi(k) {
                    contained = true;
                    face_lo[k] = bl;
                    face_hi[k] = bh;
                } else if bl < r.lo(k) {
                    face_lo[k] = bh;
                    face_hi[k] = bh;
                } else {
                    face_lo[k] = bl;
                    face_hi[k] = bl;
                    label |= 1 << k;
                }
            }
            if !contained {
                return self.search_ipath(cur, label, q, probes);
            }
            let inside = |w: usize| {
                let rw = &self.nodes[w].r;
                (0..self.dim).all(|k| rw.lo(k) <= face_lo[k] && face_hi[k] <= rw.hi(k))
            };
            let x = self.find_tail(cur, inside, probes);
            *probes += 1;
            if !self.pass_through(x, q) {
                return Some(x);
            }
            let mut next = None;
            for c in self.nodes[x].child_ids() {
                *probes += 1;
                if self.touches(c, q) {
                    next = Some(c);
                    break;
                }
            }
            let c = next?;
            *probes += 1;
            if !self.pass_through(c, q) {
                return Some(c);
            }
            cur = c;
        }
    }

    /// Binary search along the `label`-path below `start` for the end of
    /// the pass-through run.
    fn search_ipath(&self, start: usize, label: usize, q: &CoverQuery, probes: &mut usize) -> Option<usize> {
        let set = &self.ipaths[label];
        let (pid, pos) = set.refs[start];
        let path = set.path(pid);
        let (mut lo, mut hi) = (pos as usize, path.len());
        // path[lo] is pass-through; path[hi] (if any) is not.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            *probes += 1;
            if self.pass_through(path[mid] as usize, q) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        path.get(hi).map(|&v| v as usize)
    }

    /// Checks the three effective-cover conditions; returns a description
    /// of the first violation.
    pub fn check_cover(&self, cover: &[usize], q: &CoverQuery) -> std::result::Result<(), String> {
        let mut owner = vec![usize::MAX; self.points.len()];
        for &v in cover {
            for &i in self.points_of(v) {
                if owner[i as usize] != usize::MAX {
                    return Err(format!("point {i} in nodes {} and {v}", owner[i as usize]));
                }
                owner[i as usize] = v;
            }
            if !self.small(v, q) {
                return Err(format!("node {v} is not small"));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if q.b.contains_closed(p, 0.0) && owner[i] == usize::MAX {
                return Err(format!("point {i} in B is not covered"));
            }
        }
        Ok(())
    }
}

/// Builds a weighted-median search tree over positions `0..w.len()`;
/// returns the root position.
fn weighted_bst(w: &[u64], left: &mut [u32], right: &mut [u32]) -> u32 {
    let mut prefix = vec![0u64; w.len() + 1];
    for i in 0..w.len() {
        prefix[i + 1] = prefix[i] + w[i];
    }
    let median = |lo: usize, hi: usize| -> usize {
        // First position whose prefix weight reaches half of the range.
        let half = prefix[lo] + (prefix[hi] - prefix[lo]).div_ceil(2);
        let idx = prefix[lo + 1..=hi].partition_point(|&x| x < half);
        lo + idx
    };
    let root = median(0, w.len());
    // (lo, hi, parent, is_left)
    let mut stack = vec![(0usize, root, root, true), (root + 1, w.len(), root, false)];
    while let Some((lo, hi, parent, is_left)) = stack.pop() {
        if lo >= hi {
            continue;
        }
        let m = median(lo, hi);
        if is_left {
            left[parent] = m as u32;
        } else {
            right[parent] = m as u32;
        }
        stack.push((lo, m, m, true));
        stack.push((m + 1, hi, m, false));
    }
    root as u32
}
