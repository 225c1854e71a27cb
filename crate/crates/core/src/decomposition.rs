//! Recursive box decomposition into type-1 and type-2 cells.
//!
//! A box is processed by [`Decomposer::expand`], which looks only at the
//! state carried down its own root path (the live list `L`, `r_c`, the
//! number of recorded points and the record sequence). The same step drives
//! three traversals: full materialization ([`BoxTree::build`]), streaming
//! over cells without storing the tree ([`Decomposer::for_each_cell`]), and
//! lazy point location that expands only the boxes containing the query
//! ([`Decomposer::locate`]).

use serde::{Deserialize, Serialize};

use crate::distance_tree::DistanceTree;
use crate::error::{CivdError, Result};
use crate::geometry::{hypercube_of_intersection, AxisBox, Point, Region, TAU};

/// Sentinel for "no event" in parent links.
pub const NONE: u32 = u32::MAX;

/// A distance-node removal in Step 2, linked to the previous removal on the
/// same root path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEvent {
    pub node: u32,
    /// Distance from the box to the node's representative at removal.
    pub distance: f64,
    /// Points recorded on this path before the event.
    pub points_before: u32,
    pub parent: u32,
    /// Index of the event along its path.
    pub position: u32,
    /// Box node being processed when the event happened.
    pub box_node: u32,
}

/// Running maximum of the density estimate along a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMark {
    pub event: u32,
    pub node: u32,
    pub position: u32,
    pub value: f64,
    pub box_node: u32,
}

/// Hook notified of every removal; its state forks with the recursion.
pub trait RemovalObserver {
    type State: Clone + Default;

    fn on_record(&self, state: &mut Self::State, event: &RecordEvent, event_id: u32);

    fn mark(&self, _state: &Self::State) -> Option<DensityMark> {
        None
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoObserver;

impl RemovalObserver for NoObserver {
    type State = ();
    fn on_record(&self, _: &mut (), _: &RecordEvent, _: u32) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CellKind {
    /// Dominated by one distance-node.
    Type1 { node: u32 },
    /// Far from every input point.
    Type2 {
        r_prime_min: f64,
        /// Last record event on the cell's path.
        path_tail: u32,
        path_len: u32,
        mark: Option<DensityMark>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub region: Region,
    pub kind: CellKind,
    pub box_node: u32,
}

impl Cell {
    pub fn is_type2(&self) -> bool {
        matches!(self.kind, CellKind::Type2 { .. })
    }
}

/// The record sequence of a cell, reachable through parent links.
#[derive(Clone, Copy)]
pub struct PathView<'a> {
    pub events: &'a [RecordEvent],
    pub tail: u32,
}

impl<'a> PathView<'a> {
    /// Events from the last one back to the first.
    pub fn iter_rev(&self) -> impl Iterator<Item = (u32, &'a RecordEvent)> + 'a {
        let events = self.events;
        let mut cur = self.tail;
        std::iter::from_fn(move || {
            if cur == NONE {
                return None;
            }
            let id = cur;
            let e = &events[id as usize];
            cur = e.parent;
            Some((id, e))
        })
    }

    /// Events in path order.
    pub fn to_vec(&self) -> Vec<RecordEvent> {
        let mut v: Vec<RecordEvent> = self.iter_rev().map(|(_, e)| *e).collect();
        v.reverse();
        v
    }
}

/// Per-path state handed to a box.
#[derive(Clone, Debug)]
pub struct Frame<S> {
    pub bx: AxisBox,
    pub list: Vec<u32>,
    pub r_c: f64,
    pub recorded: u32,
    pub tail: u32,
    pub path_len: u32,
    pub state: S,
    pub box_node: u32,
}

/// Outcome of processing one box.
#[derive(Debug)]
pub enum Step<S> {
    Type2 { frame: Frame<S> },
    Type1 { node: u32 },
    /// Step 4.1.2: the nested box `inner.bx` is decomposed further and, when
    /// `with_outer`, the rest of the box is a type-1 cell of `node`.
    Nested { inner: Frame<S>, node: u32, with_outer: bool },
    Split { children: Vec<Frame<S>> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionStats {
    pub box_nodes: usize,
    pub type1_box: usize,
    pub type1_difference: usize,
    pub type2: usize,
    pub events: usize,
    pub max_depth: usize,
    pub max_live: usize,
}

impl DecompositionStats {
    pub fn cells(&self) -> usize {
        self.type1_box + self.type1_difference + self.type2
    }
}

/// Box-tree construction over a distance tree.
pub struct Decomposer<'a, O: RemovalObserver = NoObserver> {
    pub tree: &'a DistanceTree,
    /// Value of the domination polynomial at `n`.
    pub domination: f64,
    pub observer: O,
}

impl<'a> Decomposer<'a, NoObserver> {
    pub fn new(tree: &'a DistanceTree, domination: f64) -> Self {
        Decomposer { tree, domination, observer: NoObserver }
    }
}

impl<'a, O: RemovalObserver> Decomposer<'a, O> {
    pub fn with_observer(tree: &'a DistanceTree, domination: f64, observer: O) -> Self {
        Decomposer { tree, domination, observer }
    }

    pub fn beta(&self) -> f64 {
        self.tree.beta
    }

    /// Box of the whole decomposition, or `None` for a single input point.
    pub fn root_box(&self) -> Option<AxisBox> {
        (self.tree.len() > 1).then(|| self.tree.e_box(self.tree.root()))
    }

    pub fn root_frame(&self) -> Option<Frame<O::State>> {
        self.root_box().map(|bx| Frame {
            bx,
            list: vec![self.tree.root() as u32],
            r_c: f64::INFINITY,
            recorded: 0,
            tail: NONE,
            path_len: 0,
            state: O::State::default(),
            box_node: 0,
        })
    }

    /// Step 1 test: the overlap of the box with `E(v)` has positive volume
    /// and an edge of at least half the box edge.
    fn significant(&self, v: usize, bx: &AxisBox) -> bool {
        let ext = bx.intersection_extents(&self.tree.e_box(v));
        let dim = bx.dim();
        ext[..dim].iter().all(|&e| e > TAU)
            && ext[..dim].iter().any(|&e| e >= 0.5 * bx.edge - TAU)
    }

    /// Runs Steps 1-5 on one box. Removal events are appended to `events`.
    pub fn expand(&self, mut f: Frame<O::State>, events: &mut Vec<RecordEvent>) -> Step<O::State> {
        let tree = self.tree;
        let beta = tree.beta;
        let bx = f.bx;
        let diam = bx.diameter();

        let mut work = std::mem::take(&mut f.list);
        let mut kept: Vec<(f64, u32)> = Vec::with_capacity(work.len() + 2);
        while let Some(v) = work.pop() {
            match tree.nodes[v as usize].children {
                Some([a, b]) if self.significant(v as usize, &bx) => {
                    work.push(a as u32);
                    work.push(b as u32);
                }
                _ => kept.push((bx.dist_to_point(tree.rep(v as usize)), v)),
            }
        }

        kept.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let cut = kept.iter().take_while(|(r, _)| diam < r * beta / 2.0).count();
        for &(r, v) in &kept[..cut] {
            let id = events.len() as u32;
            let ev = RecordEvent {
                node: v,
                distance: r,
                points_before: f.recorded,
                parent: f.tail,
                position: f.path_len,
                box_node: f.box_node,
            };
            events.push(ev);
            self.observer.on_record(&mut f.state, &ev, id);
            f.recorded += tree.nodes[v as usize].size() as u32;
            f.tail = id;
            f.path_len += 1;
            if r < f.r_c {
                f.r_c = r;
            }
        }
        let live = &kept[cut..];

        if live.is_empty() {
            return Step::Type2 { frame: f };
        }

        if live.len() == 1 {
            let (r_min, v) = live[0];
            let bound = beta / (2.0 * self.domination);
            if f.r_c.is_infinite() || (r_min + diam) / f.r_c < bound {
                let e = tree.e_box(v as usize);
                let node = &tree.nodes[v as usize];
                let Some([a, b]) = node.children else {
                    return Step::Type1 { node: v };
                };
                if !bx.overlaps(&e) {
                    return Step::Type1 { node: v };
                }
                let inner = hypercube_of_intersection(&bx, &e).clamp_into(&bx);
                let with_outer = inner.edge < bx.edge - TAU;
                let inner = if with_outer { inner } else { bx };
                f.bx = inner;
                f.list = vec![a as u32, b as u32];
                return Step::Nested { inner: f, node: v, with_outer };
            }
        }

        let list: Vec<u32> = live.iter().map(|&(_, v)| v).collect();
        let children = (0..1usize << bx.dim())
            .map(|o| Frame {
                bx: bx.child(o),
                list: list.clone(),
                r_c: f.r_c,
                recorded: f.recorded,
                tail: f.tail,
                path_len: f.path_len,
                state: f.state.clone(),
                box_node: f.box_node,
            })
            .collect();
        Step::Split { children }
    }

    fn type2_cell(&self, f: &Frame<O::State>) -> Cell {
        Cell {
            region: Region::Box { outer: f.bx },
            kind: CellKind::Type2 {
                r_prime_min: f.r_c,
                path_tail: f.tail,
                path_len: f.path_len,
                mark: self.observer.mark(&f.state),
            },
            box_node: f.box_node,
        }
    }

    fn alloc(stats: &mut DecompositionStats, cap: Option<usize>, count: usize) -> Result<u32> {
        let first = stats.box_nodes as u32;
        stats.box_nodes += count;
        match cap {
            Some(c) if stats.box_nodes > c => Err(CivdError::TooManyCells(c)),
            _ => Ok(first),
        }
    }

    /// Depth-first traversal shared by streaming and materialization.
    fn walk<F>(
        &self,
        cap: Option<usize>,
        mut store: Option<&mut Vec<BoxNode>>,
        mut emit: F,
    ) -> Result<(DecompositionStats, Vec<RecordEvent>)>
    where
        F: FnMut(&Cell, PathView<'_>, Option<&O::State>),
    {
        let mut stats = DecompositionStats::default();
        let Some(root) = self.root_frame() else {
            return Ok((stats, Vec::new()));
        };
        if let Some(nodes) = store.as_deref_mut() {
            nodes.push(BoxNode { bx: root.bx, children: BoxChildren::Pending });
        }
        stats.box_nodes = 1;
        let materialize = store.is_some();
        let mut events: Vec<RecordEvent> = Vec::new();
        let mut cells: u32 = 0;
        let mut stack = vec![(root, 0usize)];
        while let Some((frame, depth)) = stack.pop() {
            if !materialize {
                // Events past this frame's path belong to finished subtrees.
                events.truncate(path_end(frame.tail));
            }
            stats.max_depth = stats.max_depth.max(depth);
            stats.max_live = stats.max_live.max(frame.list.len());
            let bx = frame.bx;
            let node_id = frame.box_node;
            let before = events.len();
            let step = self.expand(frame, &mut events);
            stats.events += events.len() - before;
            let mut type2_state = None;
            let cell = match step {
                Step::Type2 { frame } => {
                    stats.type2 += 1;
                    let cell = self.type2_cell(&frame);
                    type2_state = Some(frame.state);
                    Some(cell)
                }
                Step::Type1 { node } => {
                    stats.type1_box += 1;
                    Some(Cell { region: Region::Box { outer: bx }, kind: CellKind::Type1 { node }, box_node: node_id })
                }
                Step::Nested { mut inner, node, with_outer } => {
                    let first = Self::alloc(&mut stats, cap, 1 + usize::from(with_outer))?;
                    inner.box_node = first;
                    let inner_box = inner.bx;
                    if let Some(nodes) = store.as_deref_mut() {
                        nodes.push(BoxNode { bx: inner_box, children: BoxChildren::Pending });
                        if with_outer {
                            nodes.push(BoxNode { bx, children: BoxChildren::Pending });
                        }
                        nodes[node_id as usize].children =
                            BoxChildren::Nested { inner: first, outer: with_outer.then_some(first + 1) };
                    }
                    stack.push((inner, depth + 1));
                    with_outer.then(|| {
                        stats.type1_difference += 1;
                        Cell {
                            region: Region::BoxDifference { outer: bx, inner: inner_box },
                            kind: CellKind::Type1 { node },
                            box_node: first + 1,
                        }
                    })
                }
                Step::Split { mut children } => {
                    let first = Self::alloc(&mut stats, cap, children.len())?;
                    for (i, c) in children.iter_mut().enumerate() {
                        c.box_node = first + i as u32;
                    }
                    if let Some(nodes) = store.as_deref_mut() {
                        nodes.extend(children.iter().map(|c| BoxNode { bx: c.bx, children: BoxChildren::Pending }));
                        nodes[node_id as usize].children = BoxChildren::Split { first };
                    }
                    stack.extend(children.into_iter().rev().map(|c| (c, depth + 1)));
                    None
                }
            };
            if let Some(cell) = cell {
                let tail = match cell.kind {
                    CellKind::Type2 { path_tail, .. } => path_tail,
                    CellKind::Type1 { .. } => NONE,
                };
                emit(&cell, PathView { events: &events, tail }, type2_state.as_ref());
                if let Some(nodes) = store.as_deref_mut() {
                    nodes[cell.box_node as usize].children = BoxChildren::Leaf { cell: cells };
                }
                cells += 1;
            }
        }
        Ok((stats, events))
    }

    /// Visits every cell without keeping the box tree. `cap` bounds the
    /// number of box nodes.
    pub fn for_each_cell<F>(&self, cap: Option<usize>, mut emit: F) -> Result<DecompositionStats>
    where
        F: FnMut(&Cell, PathView<'_>),
    {
        self.walk(cap, None, |c, p, _| emit(c, p)).map(|(stats, _)| stats)
    }

    /// Like [`Self::for_each_cell`], also passing the observer state of
    /// type-2 cells.
    pub fn for_each_cell_with_state<F>(&self, cap: Option<usize>, emit: F) -> Result<DecompositionStats>
    where
        F: FnMut(&Cell, PathView<'_>, Option<&O::State>),
    {
        self.walk(cap, None, emit).map(|(stats, _)| stats)
    }

    /// Locates `q` by expanding only the boxes that contain it.
    pub fn locate(&self, q: &Point) -> Result<LazyLocation> {
        q.check_dim(self.tree.dim())?;
        check_singular(&self.tree.points, q)?;
        let mut events = Vec::new();
        let Some(mut frame) = self.root_frame() else {
            return Ok(LazyLocation { cell: None, events });
        };
        if !frame.bx.contains(q) {
            return Ok(LazyLocation { cell: None, events });
        }
        loop {
            let bx = frame.bx;
            match self.expand(frame, &mut events) {
                Step::Type2 { frame } => {
                    let cell = self.type2_cell(&frame);
                    return Ok(LazyLocation { cell: Some(cell), events });
                }
                Step::Type1 { node } => {
                    let cell = Cell { region: Region::Box { outer: bx }, kind: CellKind::Type1 { node }, box_node: 0 };
                    return Ok(LazyLocation { cell: Some(cell), events });
                }
                Step::Nested { inner, node, with_outer } => {
                    if !with_outer || inner.bx.contains(q) {
                        frame = inner;
                    } else {
                        let cell = Cell {
                            region: Region::BoxDifference { outer: bx, inner: inner.bx },
                            kind: CellKind::Type1 { node },
                            box_node: 0,
                        };
                        return Ok(LazyLocation { cell: Some(cell), events });
                    }
                }
                Step::Split { children } => {
                    let o = bx.orthant_of(q);
                    frame = children.into_iter().nth(o).expect("orthant in range");
                }
            }
        }
    }
}

fn path_end(tail: u32) -> usize {
    if tail == NONE {
        0
    } else {
        tail as usize + 1
    }
}

pub(crate) fn check_singular(points: &[Point], q: &Point) -> Result<()> {
    match points.iter().position(|p| p.dist(q) < TAU) {
        Some(i) => Err(CivdError::SingularQuery(i)),
        None => Ok(()),
    }
}

/// Result of [`Decomposer::locate`]: the cell and the events of its path.
#[derive(Clone, Debug)]
pub struct LazyLocation {
    pub cell: Option<Cell>,
    pub events: Vec<RecordEvent>,
}

impl LazyLocation {
    pub fn path(&self) -> PathView<'_> {
        let tail = match self.cell.map(|c| c.kind) {
            Some(CellKind::Type2 { path_tail, .. }) => path_tail,
            _ => NONE,
        };
        PathView { events: &self.events, tail }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoxChildren {
    Pending,
    Leaf { cell: u32 },
    /// `2^d` consecutive nodes starting at `first`, in orthant order.
    Split { first: u32 },
    /// Step 4.1.2 split into the nested box and the surrounding difference.
    Nested { inner: u32, outer: Option<u32> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxNode {
    pub bx: AxisBox,
    pub children: BoxChildren,
}

/// Where a query point falls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Cell(usize),
    Outside,
}

/// A fully materialized box tree with its cells and record events.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxTree {
    pub nodes: Vec<BoxNode>,
    pub cells: Vec<Cell>,
    pub events: Vec<RecordEvent>,
    pub stats: DecompositionStats,
}

impl BoxTree {
    /// Materializes the whole decomposition; fails with `TooManyCells` once
    /// more than `cap` box nodes would be created.
    pub fn build<O: RemovalObserver>(dec: &Decomposer<'_, O>, cap: Option<usize>) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        let (stats, events) = dec.walk(cap, Some(&mut nodes), |cell, _, _| cells.push(*cell))?;
        Ok(BoxTree { nodes, cells, events, stats })
    }

    pub fn root_box(&self) -> Option<AxisBox> {
        self.nodes.first().map(|n| n.bx)
    }

    pub fn path(&self, cell: usize) -> PathView<'_> {
        let tail = match self.cells[cell].kind {
            CellKind::Type2 { path_tail, .. } => path_tail,
            CellKind::Type1 { .. } => NONE,
        };
        PathView { events: &self.events, tail }
    }

    /// Finds the cell containing `q` under the half-open convention.
    pub fn locate(&self, q: &Point) -> Location {
        let Some(root) = self.nodes.first() else {
            return Location::Outside;
        };
        if !root.bx.contains(q) {
            return Location::Outside;
        }
        let mut id = 0usize;
        loop {
            let node = &self.nodes[id];
            match node.children {
                BoxChildren::Leaf { cell } => return Location::Cell(cell as usize),
                BoxChildren::Split { first } => id = first as usize + node.bx.orthant_of(q),
                BoxChildren::Nested { inner, outer } => {
                    id = match outer {
                        Some(o) if !self.nodes[inner as usize].bx.contains(q) => o as usize,
                        _ => inner as usize,
                    };
                }
                BoxChildren::Pending => unreachable!("incomplete box tree"),
            }
        }
    }
}
