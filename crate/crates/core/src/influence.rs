//! Influence functions and their error calculus.

use serde::{Deserialize, Serialize};

use crate::error::{CivdError, Result};
use crate::geometry::{Point, TAU};

/// A representative point standing in for `multiplicity` input points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSite {
    pub location: Point,
    pub multiplicity: usize,
}

impl WeightedSite {
    pub fn new(location: Point, multiplicity: usize) -> Self {
        debug_assert!(multiplicity >= 1);
        WeightedSite { location, multiplicity }
    }

    pub fn single(location: Point) -> Self {
        WeightedSite { location, multiplicity: 1 }
    }
}

/// Magnitude of an influence, with a direction for the vector model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfluenceValue {
    pub magnitude: f64,
    pub direction: Option<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelKind {
    /// Force-like influence: each point pulls with magnitude `|p - q|^-t`.
    Vector { t: f64 },
    /// Cluster size over the volume of the smallest ball around `q` holding it.
    Density,
}

/// Sum of multiplicity-weighted force vectors `(L - q) |L - q|^{-t-1}`.
pub fn eval_vector(sites: &[WeightedSite], q: &Point, t: f64) -> Result<InfluenceValue> {
    let mut acc = Point::origin(q.dim());
    for (i, s) in sites.iter().enumerate() {
        s.location.check_dim(q.dim())?;
        let v = s.location.sub(q);
        let r = v.norm();
        if r < TAU {
            return Err(CivdError::SingularQuery(i));
        }
        acc = acc.add(&v.scale(s.multiplicity as f64 * r.powf(-t - 1.0)));
    }
    Ok(vector_value(acc))
}

fn vector_value(acc: Point) -> InfluenceValue {
    let magnitude = acc.norm();
    let direction = (magnitude > 0.0).then(|| acc.scale(1.0 / magnitude));
    InfluenceValue { magnitude, direction }
}

/// `Gamma(d/2 + 1) / pi^{d/2}`, the reciprocal of the unit-ball volume.
pub fn unit_ball_inverse_volume(d: usize) -> f64 {
    let pi = std::f64::consts::PI;
    // Gamma(x + 1) = x Gamma(x), seeded with Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
    let mut gamma = if d.is_multiple_of(2) { 1.0 } else { pi.sqrt() };
    let mut x = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = d as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    gamma / pi.powf(d as f64 / 2.0)
}

/// Total multiplicity divided by the volume of the ball around `q` reaching
/// the farthest site.
pub fn eval_density(sites: &[WeightedSite], q: &Point, d: usize) -> Result<InfluenceValue> {
    let mut far: f64 = 0.0;
    let mut count = 0usize;
    for (i, s) in sites.iter().enumerate() {
        s.location.check_dim(q.dim())?;
        let r = s.location.dist(q);
        if r < TAU {
            return Err(CivdError::SingularQuery(i));
        }
        far = far.max(r);
        count += s.multiplicity;
    }
    if count == 0 {
        return Ok(InfluenceValue { magnitude: 0.0, direction: None });
    }
    let magnitude = count as f64 * unit_ball_inverse_volume(d) / far.powi(d as i32);
    Ok(InfluenceValue { magnitude, direction: None })
}

/// An influence function together with its tolerance bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceModel {
    pub kind: ModelKind,
    pub dim: usize,
    pub epsilon: f64,
    /// `Delta^{-1}(epsilon)`.
    pub delta_inv: f64,
    /// Decomposition tolerance derived from `epsilon`.
    pub beta: f64,
}

impl InfluenceModel {
    pub fn vector(t: f64, dim: usize, epsilon: f64) -> Result<Self> {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(CivdError::Domain { what: "vector exponent t", value: t });
        }
        Self::new(ModelKind::Vector { t }, dim, epsilon)
    }

    pub fn density(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(ModelKind::Density, dim, epsilon)
    }

    pub fn new(kind: ModelKind, dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 || dim > crate::geometry::MAX_DIM {
            return Err(CivdError::UnsupportedDimension(dim));
        }
        let delta_inv = delta_capital_inverse(kind, dim, epsilon)?;
        let beta = match kind {
            ModelKind::Vector { .. } => delta_inv,
            ModelKind::Density => {
                let a = delta_inv / 3.0;
                let b = (1.0 - delta_inv).powf(-1.0 / dim as f64) - 1.0;
                a.min(b)
            }
        };
        if !(beta > 0.0 && beta < 0.5) {
            return Err(CivdError::NoSolution(epsilon));
        }
        let model = InfluenceModel { kind, dim, epsilon, delta_inv, beta };
        if let ModelKind::Density = kind {
            debug_assert!(1.0 - (1.0 + beta).powi(-(dim as i32)) <= delta_inv + 1e-15);
            debug_assert!(beta <= delta_inv / 3.0);
        }
        Ok(model)
    }

    pub fn delta(&self, x: f64) -> Result<f64> {
        delta(self.kind, self.dim, x)
    }

    pub fn delta_capital(&self, x: f64) -> Result<f64> {
        delta_capital(self.kind, self.dim, x)
    }

    pub fn domination_poly(&self, n: usize) -> f64 {
        domination_poly(self.kind, self.dim, n)
    }

    /// Selection mapping on coincident points: the identity for both models.
    pub fn select<'a>(&self, sites: &'a [WeightedSite]) -> &'a [WeightedSite] {
        sites
    }

    pub fn eval(&self, sites: &[WeightedSite], q: &Point) -> Result<InfluenceValue> {
        match self.kind {
            ModelKind::Vector { t } => eval_vector(sites, q, t),
            ModelKind::Density => eval_density(sites, q, self.dim),
        }
    }

    /// Influence of a plain point set.
    pub fn eval_points<'a, I>(&self, points: I, q: &Point) -> Result<f64>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let sites: Vec<WeightedSite> = points.into_iter().map(|p| WeightedSite::single(*p)).collect();
        Ok(self.eval(&sites, q)?.magnitude)
    }

    pub fn t(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Vector { t } => Some(t),
            ModelKind::Density => None,
        }
    }
}

/// Perturbation sensitivity of a stable pair.
pub fn delta(kind: ModelKind, dim: usize, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(CivdError::Domain { what: "delta", value: x });
    }
    Ok(match kind {
        ModelKind::Vector { t } => 2.0 * dim as f64 * (1.0 - (1.0 - x).powf(t)),
        ModelKind::Density => {
            let d = dim as i32;
            (1.0 - (1.0 + x).powi(-d)).max((1.0 - x).powi(-d) - 1.0)
        }
    })
}

/// `1 - (1 - delta(x)) (1 - x) (1 - delta(x / (1 - x)))`.
pub fn delta_capital(kind: ModelKind, dim: usize, x: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&x) {
        return Err(CivdError::Domain { what: "Delta", value: x });
    }
    let a = delta(kind, dim, x)?;
    let b = delta(kind, dim, x / (1.0 - x))?;
    if a >= 1.0 || b >= 1.0 {
        return Err(CivdError::Domain { what: "Delta", value: x });
    }
    Ok(1.0 - (1.0 - a) * (1.0 - x) * (1.0 - b))
}

/// Upper end of the interval on which `Delta` is defined and increasing.
fn delta_capital_upper(kind: ModelKind, dim: usize) -> f64 {
    // delta(y) reaches 1 at some y*; Delta needs x / (1 - x) < y*.
    let reach = |y: f64| delta(kind, dim, y).map(|v| v >= 1.0).unwrap_or(true);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !reach(1.0 - 1e-15) {
        return 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reach(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo / (1.0 + lo)).min(0.5)
}

/// Inverse of `Delta` on its increasing branch through the origin.
pub fn delta_capital_inverse(kind: ModelKind, dim: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CivdError::NoSolution(epsilon));
    }
    let upper = delta_capital_upper(kind, dim);
    let f = |x: f64| delta_capital(kind, dim, x).unwrap_or(1.0);
    let (mut lo, mut hi) = (0.0f64, upper);
    while hi - lo > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if (f(hi) - epsilon).abs() < (f(lo) - epsilon).abs() { hi } else { lo };
    if x >= 0.5 {
        return Err(CivdError::NoSolution(epsilon));
    }
    Ok(x)
}

/// Domination polynomial: `n^{1/t}` for the vector model, `n^{1/d}` for density.
pub fn domination_poly(kind: ModelKind, dim: usize, n: usize) -> f64 {
    let n = n.max(1) as f64;
    match kind {
        ModelKind::Vector { t } => n.powf(1.0 / t),
        ModelKind::Density => n.powf(1.0 / dim as f64),
    }
}
