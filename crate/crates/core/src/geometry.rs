//! Points, axis-aligned hypercubes and box-difference regions.
//!
//! Boxes are half-open for point location: closed on the low side of every
//! axis and open on the high side, so that the `2^d` children of a split
//! claim every point of the parent exactly once. Closed variants are used
//! where a test is about geometry rather than ownership (intersection,
//! containment of a segment).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CivdError, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Absolute slack for membership tests near boundaries.
pub const TAU: f64 = 1e-9;

/// A point in `R^d` for `1 <= d <= MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(CivdError::UnsupportedDimension(dim));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CivdError::NonFinite);
        }
        let mut buf = [0.0; MAX_DIM];
        buf[..dim].copy_from_slice(coords);
        Ok(Point { coords: buf, dim: dim as u8 })
    }

    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Point { coords: [0.0; MAX_DIM], dim: dim as u8 }
    }

    /// Builds a point from a closure over axis indices.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut p = Point::origin(dim);
        for k in 0..dim {
            p.coords[k] = f(k);
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.coords[k]
    }

    #[inline]
    pub fn set(&mut self, k: usize, v: f64) {
        self.coords[k] = v;
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(CivdError::DimensionMismatch { expected: dim, got: self.dim() });
        }
        Ok(())
    }

    #[inline]
    pub fn sub(&self, other: &Point) -> Point {
        Point::from_fn(self.dim(), |k| self.coords[k] - other.coords[k])
    }

    #[inline]
    pub fn add(&self, other: &Point) -> Point {
        Point::from_fn(self.dim(), |k| self.coords[k] + other.coords[k])
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Point {
        Point::from_fn(self.dim(), |k| self.coords[k] * s)
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        self.coords().iter().zip(other.coords()).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.coords().iter().zip(other.coords()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = CivdError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(&v)
    }
}

/// Euclidean distance from `p` to the closed box `b`; zero when `p` lies in it.
pub fn dist_point_box(p: &Point, b: &AxisBox) -> Result<f64> {
    p.check_dim(b.dim())?;
    Ok(b.dist_to_point(p))
}

/// An axis-aligned hypercube.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub center: Point,
    pub edge: f64,
}

impl fmt::Debug for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AxisBox({:?}, edge {})", self.center, self.edge)
    }
}

impl AxisBox {
    pub fn new(center: Point, edge: f64) -> Self {
        debug_assert!(edge >= 0.0 && edge.is_finite());
        AxisBox { center, edge }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    #[inline]
    pub fn lo(&self, k: usize) -> f64 {
        self.center.get(k) - 0.5 * self.edge
    }

    #[inline]
    pub fn hi(&self, k: usize) -> f64 {
        self.center.get(k) + 0.5 * self.edge
    }

    /// Length of the main diagonal, `sqrt(d) * edge`.
    #[inline]
    pub fn diameter(&self) -> f64 {
        (self.dim() as f64).sqrt() * self.edge
    }

    /// Half-open membership: `lo <= x < hi` on every axis.
    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim()).all(|k| {
            let x = p.get(k);
            x >= self.lo(k) && x < self.hi(k)
        })
    }

    /// Closed membership with an absolute slack.
    #[inline]
    pub fn contains_closed(&self, p: &Point, slack: f64) -> bool {
        (0..self.dim()).all(|k| {
            let x = p.get(k);
            x >= self.lo(k) - slack && x <= self.hi(k) + slack
        })
    }

    /// True when `other` lies inside `self` (closed, with slack).
    pub fn contains_box(&self, other: &AxisBox, slack: f64) -> bool {
        (0..self.dim())
            .all(|k| other.lo(k) >= self.lo(k) - slack && other.hi(k) <= self.hi(k) + slack)
    }

    /// Distance from `p` to the closest point of the closed box.
    #[inline]
    pub fn dist_to_point(&self, p: &Point) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim() {
            let x = p.get(k);
            let d = if x < self.lo(k) {
                self.lo(k) - x
            } else if x > self.hi(k) {
                x - self.hi(k)
            } else {
                0.0
            };
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Distance from `p` to the farthest point of the box.
    pub fn max_dist_to_point(&self, p: &Point) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim() {
            let x = p.get(k);
            let d = (x - self.lo(k)).abs().max((self.hi(k) - x).abs());
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Per-axis extents of the intersection of two closed boxes; an extent
    /// is negative when the boxes are separated along that axis.
    pub fn intersection_extents(&self, other: &AxisBox) -> [f64; MAX_DIM] {
        let mut ext = [0.0; MAX_DIM];
        for (k, e) in ext.iter_mut().enumerate().take(self.dim()) {
            *e = self.hi(k).min(other.hi(k)) - self.lo(k).max(other.lo(k));
        }
        ext
    }

    /// Whether the closed boxes share at least one point.
    pub fn intersects_closed(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|k| self.lo(k) <= other.hi(k) && other.lo(k) <= self.hi(k))
    }

    /// Whether the intersection has positive measure (every extent above `TAU`).
    pub fn overlaps(&self, other: &AxisBox) -> bool {
        let ext = self.intersection_extents(other);
        ext[..self.dim()].iter().all(|&e| e > TAU)
    }

    /// Orthant index of `p` relative to the center: bit `k` is set when
    /// `p_k >= center_k`.
    #[inline]
    pub fn orthant_of(&self, p: &Point) -> usize {
        let mut idx = 0;
        for k in 0..self.dim() {
            if p.get(k) >= self.center.get(k) {
                idx |= 1 << k;
            }
        }
        idx
    }

    /// The child box with the given orthant index.
    #[inline]
    pub fn child(&self, orthant: usize) -> AxisBox {
        let quarter = 0.25 * self.edge;
        let c = Point::from_fn(self.dim(), |k| {
            if orthant & (1 << k) != 0 {
                self.center.get(k) + quarter
            } else {
                self.center.get(k) - quarter
            }
        });
        AxisBox { center: c, edge: 0.5 * self.edge }
    }

    /// Splits into `2^d` half-size boxes, indexed by orthant.
    pub fn split(&self) -> Result<Vec<AxisBox>> {
        if self.edge <= 0.0 {
            return Err(CivdError::ZeroSizeBox);
        }
        Ok((0..1usize << self.dim()).map(|o| self.child(o)).collect())
    }

    /// Moves the box the least amount needed to fit inside `outer`.
    /// Requires `self.edge <= outer.edge`.
    pub fn clamp_into(&self, outer: &AxisBox) -> AxisBox {
        let half = 0.5 * self.edge;
        let c = Point::from_fn(self.dim(), |k| {
            let lo = outer.lo(k) + half;
            let hi = outer.hi(k) - half;
            if lo > hi {
                outer.center.get(k)
            } else {
                self.center.get(k).clamp(lo, hi)
            }
        });
        AxisBox { center: c, edge: self.edge }
    }

    /// Corner of the box selected by the bits of `mask` (bit set: high side).
    pub fn corner(&self, mask: usize) -> Point {
        Point::from_fn(self.dim(), |k| {
            if mask & (1 << k) != 0 {
                self.hi(k)
            } else {
                self.lo(k)
            }
        })
    }
}

/// Smallest axis-aligned hypercube containing every point: centered at the
/// midpoint of the per-axis extremes, edge equal to the largest extent.
pub fn smallest_enclosing_box<'a, I>(points: I) -> Result<AxisBox>
where
    I: IntoIterator<Item = &'a Point>,
{
    let mut iter = points.into_iter();
    let first = iter.next().ok_or(CivdError::EmptyInput)?;
    let dim = first.dim();
    let mut lo = *first;
    let mut hi = *first;
    for p in iter {
        p.check_dim(dim)?;
        for k in 0..dim {
            lo.set(k, lo.get(k).min(p.get(k)));
            hi.set(k, hi.get(k).max(p.get(k)));
        }
    }
    let edge = (0..dim).map(|k| hi.get(k) - lo.get(k)).fold(0.0, f64::max);
    let center = Point::from_fn(dim, |k| 0.5 * (lo.get(k) + hi.get(k)));
    Ok(AxisBox { center, edge })
}

/// Smallest hypercube containing the (rectangular) intersection of two boxes.
pub fn hypercube_of_intersection(a: &AxisBox, b: &AxisBox) -> AxisBox {
    let dim = a.dim();
    let mut edge: f64 = 0.0;
    let center = Point::from_fn(dim, |k| {
        let lo = a.lo(k).max(b.lo(k));
        let hi = a.hi(k).min(b.hi(k));
        edge = edge.max((hi - lo).max(0.0));
        0.5 * (lo + hi)
    });
    AxisBox { center, edge }
}

/// Shape of a cell: a box, or a box with a nested box removed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box { outer: AxisBox },
    BoxDifference { outer: AxisBox, inner: AxisBox },
}

impl Region {
    pub fn outer(&self) -> &AxisBox {
        match self {
            Region::Box { outer } | Region::BoxDifference { outer, .. } => outer,
        }
    }

    pub fn inner(&self) -> Option<&AxisBox> {
        match self {
            Region::Box { .. } => None,
            Region::BoxDifference { inner, .. } => Some(inner),
        }
    }

    /// Half-open membership consistent with point location.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Box { outer } => outer.contains(p),
            Region::BoxDifference { outer, inner } => outer.contains(p) && !inner.contains(p),
        }
    }

    /// Diameter of the enclosing box.
    pub fn diameter(&self) -> f64 {
        self.outer().diameter()
    }

    /// Distance from `p` to the closure of the region.
    pub fn dist_to_point(&self, p: &Point) -> f64 {
        match self {
            Region::Box { outer } => outer.dist_to_point(p),
            Region::BoxDifference { outer, inner } => {
                let d = outer.dist_to_point(p);
                if d > 0.0 || !inner.contains_closed(p, 0.0) {
                    return d;
                }
                // p inside the hole: nearest point of the ring is on a hole face.
                (0..p.dim())
                    .map(|k| {
                        let lo_gap = if inner.lo(k) > outer.lo(k) {
                            p.get(k) - inner.lo(k)
                        } else {
                            f64::INFINITY
                        };
                        let hi_gap = if inner.hi(k) < outer.hi(k) {
                            inner.hi(k) - p.get(k)
                        } else {
                            f64::INFINITY
                        };
                        lo_gap.min(hi_gap)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// A point well inside the region: the box center, or for a box
    /// difference the center of its thickest axis slab.
    pub fn representative_point(&self) -> Point {
        match self {
            Region::Box { outer } => outer.center,
            Region::BoxDifference { outer, inner } => {
                let mut best = (f64::NEG_INFINITY, 0usize, false);
                for k in 0..outer.dim() {
                    let low = inner.lo(k) - outer.lo(k);
                    let high = outer.hi(k) - inner.hi(k);
                    if low > best.0 {
                        best = (low, k, false);
                    }
                    if high > best.0 {
                        best = (high, k, true);
                    }
                }
                let (_, axis, high_side) = best;
                let mut c = outer.center;
                let v = if high_side {
                    0.5 * (inner.hi(axis) + outer.hi(axis))
                } else {
                    0.5 * (outer.lo(axis) + inner.lo(axis))
                };
                c.set(axis, v);
                c
            }
        }
    }

    /// Draws a uniform point of the region by rejection from the outer box.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let outer = self.outer();
        loop {
            let p = Point::from_fn(outer.dim(), |k| {
                if outer.edge > 0.0 {
                    rng.gen_range(outer.lo(k)..outer.hi(k))
                } else {
                    outer.center.get(k)
                }
            });
            if self.contains(&p) || outer.edge == 0.0 {
                return p;
            }
        }
    }
}

/// How a segment sits relative to a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRelation {
    Disjoint,
    /// Intersects with exactly one endpoint inside.
    Cuts,
    /// Intersects with neither endpoint inside.
    PassesThrough,
    Contained,
}

/// Classifies the segment `[a, b]` against the closed box.
pub fn box_edge_relation(a: &Point, b: &Point, bx: &AxisBox) -> Result<EdgeRelation> {
    a.check_dim(bx.dim())?;
    b.check_dim(bx.dim())?;
    let a_in = bx.contains_closed(a, TAU);
    let b_in = bx.contains_closed(b, TAU);
    if a_in && b_in {
        return Ok(EdgeRelation::Contained);
    }
    if a_in || b_in {
        return Ok(EdgeRelation::Cuts);
    }
    // Clip the parametric segment against each slab.
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..bx.dim() {
        let (lo, hi) = (bx.lo(k) - TAU, bx.hi(k) + TAU);
        let da = b.get(k) - a.get(k);
        let x = a.get(k);
        if da == 0.0 {
            if x < lo || x > hi {
                return Ok(EdgeRelation::Disjoint);
            }
            continue;
        }
        let mut ta = (lo - x) / da;
        let mut tb = (hi - x) / da;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return Ok(EdgeRelation::Disjoint);
        }
    }
    Ok(EdgeRelation::PassesThrough)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    fn unit2() -> AxisBox {
        AxisBox::new(pt(&[0.0, 0.0]), 2.0)
    }

    #[test]
    fn point_box_distance_examples() {
        let b = unit2();
        assert_eq!(dist_point_box(&pt(&[0.0, 0.0]), &b).unwrap(), 0.0);
        assert_eq!(dist_point_box(&pt(&[3.0, 0.0]), &b).unwrap(), 2.0);
        let d = dist_point_box(&pt(&[3.0, 4.0]), &b).unwrap();
        assert!((d - 13f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            dist_point_box(&pt(&[1.0]), &b),
            Err(CivdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn point_box_distance_matches_sampled_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let b = AxisBox::new(pt(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]), rng.gen_range(0.1..3.0));
            let p = pt(&[rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)]);
            let exact = b.dist_to_point(&p);
            // Grid over the box; the minimum over samples can only exceed the true value.
            let mut best = f64::INFINITY;
            let steps = 200;
            for i in 0..=steps {
                for j in 0..=steps {
                    let q = pt(&[
                        b.lo(0) + b.edge * i as f64 / steps as f64,
                        b.lo(1) + b.edge * j as f64 / steps as f64,
                    ]);
                    best = best.min(q.dist(&p));
                }
            }
            assert!(exact <= best + 1e-12);
            assert!(best - exact <= b.edge * 2f64.sqrt() / steps as f64 + 1e-12);
        }
    }

    #[test]
    fn split_examples() {
        let b = AxisBox::new(pt(&[0.0]), 2.0);
        let kids = b.split().unwrap();
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0], AxisBox::new(pt(&[-0.5]), 1.0));
        assert_eq!(kids[1], AxisBox::new(pt(&[0.5]), 1.0));

        let kids = unit2().split().unwrap();
        assert_eq!(kids.len(), 4);
        for (o, k) in kids.iter().enumerate() {
            assert_eq!(k.edge, 1.0);
            let sx = if o & 1 != 0 { 0.5 } else { -0.5 };
            let sy = if o & 2 != 0 { 0.5 } else { -0.5 };
            assert_eq!(k.center, pt(&[sx, sy]));
        }
        assert_eq!(AxisBox::new(pt(&[1.0, 1.0]), 0.0).split(), Err(CivdError::ZeroSizeBox));
    }

    #[test]
    fn split_tiles_parent_under_half_open_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=3 {
            for _ in 0..5 {
                let c = Point::from_fn(dim, |_| rng.gen_range(-5.0..5.0));
                let b = AxisBox::new(c, rng.gen_range(0.5..4.0));
                let kids = b.split().unwrap();
                for _ in 0..10_000 {
                    let p = Point::from_fn(dim, |k| rng.gen_range(b.lo(k) - 1.0..b.hi(k) + 1.0));
                    let owners = kids.iter().filter(|k| k.contains(&p)).count();
                    assert_eq!(owners, usize::from(b.contains(&p)));
                    if b.contains(&p) {
                        assert!(kids[b.orthant_of(&p)].contains(&p));
                    }
                }
            }
        }
    }

    #[test]
    fn enclosing_box_examples() {
        let b = smallest_enclosing_box(&[pt(&[0.0, 0.0])]).unwrap();
        assert_eq!(b, AxisBox::new(pt(&[0.0, 0.0]), 0.0));
        let b = smallest_enclosing_box(&[pt(&[0.0, 0.0]), pt(&[2.0, 1.0])]).unwrap();
        assert_eq!(b.edge, 2.0);
        assert_eq!(b.center, pt(&[1.0, 0.5]));
        assert_eq!(smallest_enclosing_box(&[]), Err(CivdError::EmptyInput));
    }

    #[test]
    fn edge_relation_examples() {
        let b = unit2();
        let rel = |a: [f64; 2], c: [f64; 2]| box_edge_relation(&pt(&a), &pt(&c), &b).unwrap();
        assert_eq!(rel([-2.0, 0.0], [2.0, 0.0]), EdgeRelation::PassesThrough);
        assert_eq!(rel([0.0, 0.0], [2.0, 0.0]), EdgeRelation::Cuts);
        assert_eq!(rel([-0.2, 0.0], [0.2, 0.0]), EdgeRelation::Contained);
        assert_eq!(rel([2.0, 2.0], [3.0, 5.0]), EdgeRelation::Disjoint);
        assert_eq!(rel([3.0, 0.0], [3.0, 0.0]), EdgeRelation::Disjoint);
        assert_eq!(rel([0.5, 0.5], [0.5, 0.5]), EdgeRelation::Contained);
    }

    #[test]
    fn region_representative_is_inside() {
        let outer = AxisBox::new(pt(&[0.0, 0.0]), 4.0);
        let inner = AxisBox::new(pt(&[1.0, -0.5]), 1.0);
        let r = Region::BoxDifference { outer, inner };
        let q = r.representative_point();
        assert!(r.contains(&q));
        assert_eq!(q, pt(&[-0.75, 0.0]));
    }

    #[test]
    fn difference_distance_inside_hole() {
        let outer = AxisBox::new(pt(&[0.0, 0.0]), 4.0);
        let inner = AxisBox::new(pt(&[0.0, 0.0]), 2.0);
        let r = Region::BoxDifference { outer, inner };
        assert!((r.dist_to_point(&pt(&[0.25, 0.0])) - 0.75).abs() < 1e-12);
        assert_eq!(r.dist_to_point(&pt(&[1.5, 0.0])), 0.0);
        assert!((r.dist_to_point(&pt(&[3.0, 0.0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clamp_keeps_box_inside() {
        let outer = AxisBox::new(pt(&[0.0, 0.0]), 2.0);
        let b = AxisBox::new(pt(&[0.9, -0.2]), 0.5).clamp_into(&outer);
        assert!(outer.contains_box(&b, 0.0));
        assert_eq!(b.center, pt(&[0.75, -0.2]));
    }

    proptest::proptest! {
        #[test]
        fn enclosing_box_is_tight_and_equivariant(
            raw in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..30),
            shift in (-10.0f64..10.0, -10.0f64..10.0),
        ) {
            let pts: Vec<Point> = raw.iter().map(|&(x, y)| pt(&[x, y])).collect();
            let b = smallest_enclosing_box(&pts).unwrap();
            for p in &pts {
                proptest::prop_assert!(b.contains_closed(p, 1e-9));
            }
            if b.edge > 0.0 {
                let shrunk = AxisBox::new(b.center, b.edge * (1.0 - 1e-6));
                let escaped = pts.iter().any(|p| !shrunk.contains_closed(p, 0.0));
                proptest::prop_assert!(escaped);
            }
            let w = pt(&[shift.0, shift.1]);
            let moved: Vec<Point> = pts.iter().map(|p| p.add(&w)).collect();
            let bm = smallest_enclosing_box(&moved).unwrap();
            proptest::prop_assert!((bm.edge - b.edge).abs() < 1e-9);
            proptest::prop_assert!(bm.center.dist(&b.center.add(&w)) < 1e-9);
            let mut rev = pts.clone();
            rev.reverse();
            proptest::prop_assert_eq!(smallest_enclosing_box(&rev).unwrap(), b);
        }

        #[test]
        fn distance_zero_iff_inside(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let b = unit2();
            let p = pt(&[x, y]);
            proptest::prop_assert_eq!(b.dist_to_point(&p) == 0.0, b.contains_closed(&p, 0.0));
        }
    }
}
