//! Brute-force references for small instances.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::civd::Civd;
use crate::error::{CivdError, Result};
use crate::geometry::{smallest_enclosing_box, AxisBox, Point, TAU};
use crate::influence::{unit_ball_inverse_volume, ModelKind};

/// Largest `n` for subset enumeration.
pub const BRUTE_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub query: Point,
    pub exact_value: f64,
    pub approx_value: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn forces(points: &[Point], q: &Point, t: f64) -> Result<Vec<Point>> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.check_dim(q.dim())?;
            let a = p.sub(q);
            let r = a.norm();
            if r < TAU {
                return Err(CivdError::SingularQuery(i));
            }
            Ok(a.scale(r.powf(-t - 1.0)))
        })
        .collect()
}

/// Exact maximum influence site of `q` by enumerating every nonempty subset.
pub fn brute_max_vector(points: &[Point], q: &Point, t: f64) -> Result<(Vec<usize>, f64)> {
    let n = points.len();
    if n > BRUTE_CAP {
        return Err(CivdError::TooLarge { n, cap: BRUTE_CAP });
    }
    if n == 0 {
        return Err(CivdError::EmptyInput);
    }
    let f = forces(points, q, t)?;
    let dim = q.dim();
    // Gray-code walk: one vector toggles per step.
    let mut acc = Point::origin(dim);
    let mut best = (0u32, -1.0);
    let mut mask = 0u32;
    for step in 1u32..(1 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        acc = if mask >> bit & 1 == 1 { acc.add(&f[bit]) } else { acc.sub(&f[bit]) };
        let len = acc.norm();
        if len > best.1 {
            best = (mask, len);
        }
    }
    let site: Vec<usize> = (0..n).filter(|&i| best.0 >> i & 1 == 1).collect();
    let exact = site.iter().fold(Point::origin(dim), |a, &i| a.add(&f[i])).norm();
    Ok((site, exact))
}

/// Best positive side over all lines through `q` in the plane, checking the
/// sides at every critical direction and between consecutive ones. Other
/// dimensions fall back to subset enumeration.
pub fn hyperplane_max_vector(points: &[Point], q: &Point, t: f64) -> Result<(Vec<usize>, f64)> {
    if q.dim() != 2 {
        return brute_max_vector(points, q, t);
    }
    if points.is_empty() {
        return Err(CivdError::EmptyInput);
    }
    let f = forces(points, q, t)?;
    let mut crit: Vec<f64> = f
        .iter()
        .flat_map(|a| {
            let th = a.get(1).atan2(a.get(0));
            [(th + PI / 2.0).rem_euclid(2.0 * PI), (th - PI / 2.0).rem_euclid(2.0 * PI)]
        })
        .collect();
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut dirs: Vec<(f64, bool)> = Vec::new();
    for (i, &c) in crit.iter().enumerate() {
        let next = if i + 1 < crit.len() { crit[i + 1] } else { crit[0] + 2.0 * PI };
        dirs.push((c, true));
        dirs.push((c, false));
        dirs.push(((c + next) / 2.0, false));
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), -1.0);
    for (phi, closed) in dirs {
        let n = [phi.cos(), phi.sin()];
        let side: Vec<usize> = (0..f.len())
            .filter(|&i| {
                let a = &f[i];
                let s = a.get(0) * n[0] + a.get(1) * n[1];
                let tol = 1e-12 * a.norm();
                if closed {
                    s >= -tol
                } else {
                    s > tol
                }
            })
            .collect();
        let len = side.iter().fold(Point::origin(2), |a, &i| a.add(&f[i])).norm();
        if len > best.1 {
            best = (side, len);
        }
    }
    Ok(best)
}

/// Exact densest cluster of `q`: the best suffix of the points sorted by
/// decreasing distance.
pub fn density_scan_max(points: &[Point], q: &Point, d: usize) -> Result<(Vec<usize>, f64)> {
    if points.is_empty() {
        return Err(CivdError::EmptyInput);
    }
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        p.check_dim(q.dim())?;
        let r = p.dist(q);
        if r < TAU {
            return Err(CivdError::SingularQuery(i));
        }
        dist.push((r, i));
    }
    dist.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let c_d = unit_ball_inverse_volume(d);
    let n = points.len();
    let mut best = (0usize, -1.0);
    for (i, &(r, _)) in dist.iter().enumerate() {
        let v = c_d * (n - i) as f64 / r.powi(d as i32);
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut site: Vec<usize> = dist[best.0..].iter().map(|&(_, i)| i).collect();
    site.sort_unstable();
    Ok((site, best.1))
}

/// Whether some hyperplane through the origin has `subset` strictly on its
/// positive side and every other vector strictly on its negative side.
/// Exact for `d <= 2`; for `d = 3` assumes general position.
pub fn strictly_separable(vectors: &[Point], subset: &[usize]) -> bool {
    let signed: Vec<Point> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| if subset.contains(&i) { *v } else { v.scale(-1.0) })
        .collect();
    if signed.is_empty() {
        return true;
    }
    match signed[0].dim() {
        1 => signed.iter().all(|v| v.get(0) > 0.0) || signed.iter().all(|v| v.get(0) < 0.0),
        2 => {
            let mut ang: Vec<f64> = signed.iter().map(|v| v.get(1).atan2(v.get(0))).collect();
            ang.sort_by(f64::total_cmp);
            let mut gap = ang[0] + 2.0 * PI - ang[ang.len() - 1];
            for w in ang.windows(2) {
                gap = gap.max(w[1] - w[0]);
            }
            gap > PI
        }
        3 => !origin_in_hull_3d(&signed),
        d => unimplemented!("separability oracle for d = {d}"),
    }
}

fn det3(a: &Point, b: &Point, c: &Point) -> f64 {
    a.get(0) * (b.get(1) * c.get(2) - b.get(2) * c.get(1)) - a.get(1) * (b.get(0) * c.get(2) - b.get(2) * c.get(0))
        + a.get(2) * (b.get(0) * c.get(1) - b.get(1) * c.get(0))
}

/// Origin inside the hull of some four vectors, or between two opposite ones.
fn origin_in_hull_3d(v: &[Point]) -> bool {
    let m = v.len();
    for i in 0..m {
        for j in i + 1..m {
            let cos = v[i].dot(&v[j]) / (v[i].norm() * v[j].norm());
            if cos <= -1.0 + 1e-15 {
                return true;
            }
        }
    }
    let o = Point::origin(3);
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    let t = [&v[a], &v[b], &v[c], &v[d]];
                    // The origin is inside iff it lies on the inner side of every face.
                    let inside = (0..4).all(|skip| {
                        let f: Vec<&Point> = (0..4).filter(|&k| k != skip).map(|k| t[k]).collect();
                        let s_opp = det3(&f[1].sub(f[0]), &f[2].sub(f[0]), &t[skip].sub(f[0]));
                        let s_org = det3(&f[1].sub(f[0]), &f[2].sub(f[0]), &o.sub(f[0]));
                        s_opp * s_org > 0.0
                    });
                    if inside {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Box from which validation queries are drawn: twice the input's bounding
/// hypercube, so some samples fall outside the decomposition.
pub fn sample_box(points: &[Point]) -> Result<AxisBox> {
    let b = smallest_enclosing_box(points.iter())?;
    let edge = if b.edge > 0.0 { 2.0 * b.edge } else { 2.0 };
    Ok(AxisBox::new(b.center, edge))
}

/// Draws `samples` query points away from the input points.
pub fn sample_queries(points: &[Point], samples: usize, seed: u64) -> Result<Vec<Point>> {
    let b = sample_box(points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let q = Point::from_fn(b.dim(), |k| rng.gen_range(b.lo(k)..b.hi(k)));
        if points.iter().all(|p| p.dist(&q) > TAU) {
            out.push(q);
        }
    }
    Ok(out)
}

/// Exact optimum for the model at `q`.
pub fn exact_value(civd: &Civd, q: &Point) -> Result<f64> {
    let pts = civd.points();
    match civd.model.kind {
        ModelKind::Density => density_scan_max(pts, q, civd.dim()).map(|r| r.1),
        ModelKind::Vector { t } if pts.len() <= BRUTE_CAP => brute_max_vector(pts, q, t).map(|r| r.1),
        ModelKind::Vector { t } if civd.dim() == 2 => hyperplane_max_vector(pts, q, t).map(|r| r.1),
        ModelKind::Vector { .. } => Err(CivdError::TooLarge { n: pts.len(), cap: BRUTE_CAP }),
    }
}

/// Compares one answer against the exact optimum. Passing means
/// `approx >= (1 - epsilon) exact` up to a relative `TAU`.
pub fn compare(civd: &Civd, q: &Point, approx: f64) -> Result<OracleReport> {
    let exact = exact_value(civd, q)?;
    let ratio = if exact > 0.0 { approx / exact } else { 1.0 };
    let pass = approx >= (1.0 - civd.model.epsilon) * exact * (1.0 - TAU);
    Ok(OracleReport { query: *q, exact_value: exact, approx_value: approx, ratio, pass })
}

/// Checks the lazily located answer of `q`.
pub fn check_query(civd: &Civd, q: &Point) -> Result<OracleReport> {
    compare(civd, q, civd.query(q)?.value)
}

/// Validates `samples` random queries answered by `answer`, using up to
/// `threads` worker threads.
pub fn validate_with<F>(civd: &Civd, samples: usize, seed: u64, threads: usize, answer: F) -> Result<Vec<OracleReport>>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    let queries = sample_queries(civd.points(), samples, seed)?;
    let threads = threads.clamp(1, queries.len().max(1));
    let chunk = queries.len().div_ceil(threads).max(1);
    let answer = &answer;
    let parts: Vec<Result<Vec<OracleReport>>> = std::thread::scope(|s| {
        let handles: Vec<_> = queries
            .chunks(chunk)
            .map(|qs| s.spawn(move || qs.iter().map(|q| compare(civd, q, answer(q)?)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("validation worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(queries.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Validates `samples` random queries against the lazy query path.
pub fn validate_civd(civd: &Civd, samples: usize, seed: u64, threads: usize) -> Result<Vec<OracleReport>> {
    validate_with(civd, samples, seed, threads, |q| civd.query(q).map(|a| a.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    fn random_points(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        (0..n).map(|_| Point::from_fn(dim, |_| rng.gen_range(0.0..1.0))).collect()
    }

    #[test]
    fn brute_examples() {
        let (s, v) = brute_max_vector(&[p(&[2.0, 0.0])], &p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(s, vec![0]);
        assert!((v - 0.5).abs() < 1e-15);
        let (s, v) = brute_max_vector(&[p(&[1.0, 0.0]), p(&[-1.0, 0.0])], &p(&[0.0, 0.0]), 2.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((v - 1.0).abs() < 1e-15);
        let many = vec![p(&[1.0]); 21];
        assert_eq!(brute_max_vector(&many, &p(&[0.0]), 1.0), Err(CivdError::TooLarge { n: 21, cap: 20 }));
    }

    #[test]
    fn brute_optimum_is_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for dim in 2..=3 {
            for _ in 0..50 {
                let pts = random_points(10, dim, &mut rng);
                let q = Point::from_fn(dim, |_| rng.gen_range(-0.5..1.5));
                let (site, _) = brute_max_vector(&pts, &q, 1.0 + rng.gen_range(0.0..2.0)).unwrap();
                let f = forces(&pts, &q, 1.0).unwrap();
                assert!(strictly_separable(&f, &site));
            }
        }
    }

    #[test]
    fn hyperplane_oracle_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..200 {
            let pts = random_points(10, 2, &mut rng);
            let q = Point::from_fn(2, |_| rng.gen_range(-0.5..1.5));
            let t = if k % 2 == 0 { 1.0 } else { 2.0 };
            let (_, a) = brute_max_vector(&pts, &q, t).unwrap();
            let (_, b) = hyperplane_max_vector(&pts, &q, t).unwrap();
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn collinear_ray_takes_everything() {
        let pts = [p(&[1.0, 1.0]), p(&[2.0, 2.0]), p(&[3.0, 3.0])];
        let (s, _) = hyperplane_max_vector(&pts, &p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(s, vec![0, 1, 2]);
    }

    #[test]
    fn symmetric_cross() {
        let pts = [p(&[1.0, 0.0]), p(&[0.0, 1.0]), p(&[-1.0, 0.0]), p(&[0.0, -1.0])];
        let q = p(&[0.0, 0.0]);
        let (_, a) = brute_max_vector(&pts, &q, 1.0).unwrap();
        let (s, b) = hyperplane_max_vector(&pts, &q, 1.0).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-12);
        assert!((b - a).abs() < 1e-12);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn density_examples() {
        let (s, v) = density_scan_max(&[p(&[2.0, 0.0])], &p(&[0.0, 0.0]), 2).unwrap();
        assert_eq!(s, vec![0]);
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let pts = [p(&[1.0, 0.0]), p(&[0.0, 1.0]), p(&[-1.0, 0.0]), p(&[10.0, 0.0])];
        let (s, v) = density_scan_max(&pts, &p(&[0.0, 0.0]), 2).unwrap();
        assert_eq!(s, vec![0, 1, 2]);
        assert!((v - 3.0 / PI).abs() < 1e-15);
    }

    fn density_of(pts: &[Point], subset: &[usize], q: &Point, d: usize) -> f64 {
        let far = subset.iter().map(|&i| pts[i].dist(q)).fold(0.0, f64::max);
        unit_ball_inverse_volume(d) * subset.len() as f64 / far.powi(d as i32)
    }

    #[test]
    fn density_scan_matches_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in 0..200 {
            let d = 1 + k % 3;
            let n = rng.gen_range(1..=12);
            let pts = random_points(n, d, &mut rng);
            let q = Point::from_fn(d, |_| rng.gen_range(-0.5..1.5));
            let (_, v) = density_scan_max(&pts, &q, d).unwrap();
            let mut best: f64 = 0.0;
            for mask in 1u32..(1 << n) {
                let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                best = best.max(density_of(&pts, &s, &q, d));
            }
            assert!((v - best).abs() <= 1e-12 * best);
        }
    }

    #[test]
    fn separability_oracle_basics() {
        let v = [p(&[1.0, 0.0]), p(&[-1.0, 0.0])];
        assert!(strictly_separable(&v, &[0]));
        assert!(!strictly_separable(&v, &[0, 1]));
        assert!(!strictly_separable(&v, &[]));
        let w = [p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0]), p(&[-1.0, -1.0, -1.0])];
        assert!(!strictly_separable(&w, &[0, 1, 2, 3]));
        assert!(strictly_separable(&w, &[0, 1, 2]));
    }

    #[test]
    fn samples_avoid_points() {
        let pts = [p(&[0.0, 0.0]), p(&[1.0, 1.0])];
        let qs = sample_queries(&pts, 100, 3).unwrap();
        assert_eq!(qs.len(), 100);
        let b = sample_box(&pts).unwrap();
        assert!(qs.iter().all(|q| b.contains(q)));
        assert_eq!(qs, sample_queries(&pts, 100, 3).unwrap());
    }
}
