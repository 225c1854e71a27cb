//! Subsets of vectors cut out by hyperplanes through the origin.

use std::collections::HashSet;
use std::f64::consts::PI;

use crate::error::{CivdError, Result};
use crate::geometry::Point;

const REL_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let k = m.len();
    let mut d = 1.0;
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for j in c..k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    d
}

/// Vector orthogonal to `k - 1` vectors in `R^k`, by cofactor expansion.
/// Zero when they are linearly dependent.
fn normal_of(rows: &[&[f64]], k: usize) -> Vec<f64> {
    if k == 2 {
        return vec![-rows[0][1], rows[0][0]];
    }
    (0..k)
        .map(|j| {
            let minor: Vec<Vec<f64>> =
                rows.iter().map(|r| (0..k).filter(|&c| c != j).map(|c| r[c]).collect()).collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(minor)
        })
        .collect()
}

/// Orthonormal basis of the complement of `n` in `R^k`.
fn complement_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let k = n.len();
    let nn = norm(n);
    let mut basis: Vec<Vec<f64>> = vec![n.iter().map(|x| x / nn).collect()];
    for e in 0..k {
        let mut v = vec![0.0; k];
        v[e] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let l = norm(&v);
        if l > 1e-6 {
            basis.push(v.into_iter().map(|x| x / l).collect());
        }
        if basis.len() == k {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// A unit vector orthogonal to the span of `vecs`, which must be a proper subspace.
fn orthogonal_to_all(vecs: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let reduce = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for b in basis {
            let c = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    };
    for v in vecs {
        let mut r = v.clone();
        reduce(&mut r, &basis);
        let l = norm(&r);
        if l > REL_TOL * norm(v) {
            basis.push(r.into_iter().map(|x| x / l).collect());
        }
    }
    let mut best = vec![0.0; k];
    for e in 0..k {
        let mut r = vec![0.0; k];
        r[e] = 1.0;
        reduce(&mut r, &basis);
        if norm(&r) > norm(&best) {
            best = r;
        }
    }
    let l = norm(&best);
    best.into_iter().map(|x| x / l).collect()
}

fn combinations(m: usize, r: usize, emit: &mut dyn FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    if r > m {
        return;
    }
    loop {
        emit(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `emit` with positive sides (as index lists into `vecs`) of
/// hyperplanes through the origin, covering every strict and closed side.
/// Sets may repeat.
fn sides_rec(vecs: &[Vec<f64>], emit: &mut dyn FnMut(&[usize])) {
    let m = vecs.len();
    if m == 0 {
        emit(&[]);
        return;
    }
    let k = vecs[0].len();
    let lens: Vec<f64> = vecs.iter().map(|v| norm(v)).collect();
    if k == 1 {
        for s in [1.0, -1.0] {
            let pos: Vec<usize> = (0..m).filter(|&i| s * vecs[i][0] > REL_TOL * lens[i]).collect();
            let zero: Vec<usize> = (0..m).filter(|&i| vecs[i][0].abs() <= REL_TOL * lens[i]).collect();
            emit(&pos);
            let mut closed = pos.clone();
            closed.extend_from_slice(&zero);
            emit(&closed);
        }
        return;
    }
    let mut normals: Vec<Vec<f64>> = Vec::new();
    combinations(m, k - 1, &mut |sub| {
        let rows: Vec<&[f64]> = sub.iter().map(|&i| vecs[i].as_slice()).collect();
        let n = normal_of(&rows, k);
        let scale: f64 = sub.iter().map(|&i| lens[i]).product();
        if norm(&n) > REL_TOL * scale {
            normals.push(n);
        }
    });
    if normals.is_empty() {
        // Every vector lies in a common proper subspace; use a normal of it.
        normals.push(orthogonal_to_all(vecs, k));
    }
    for n0 in normals {
        for s in [1.0, -1.0] {
            let n: Vec<f64> = n0.iter().map(|x| s * x).collect();
            let nl = norm(&n);
            let mut base = Vec::new();
            let mut zero = Vec::new();
            for i in 0..m {
                let p = dot(&vecs[i], &n);
                if p.abs() <= REL_TOL * lens[i] * nl {
                    zero.push(i);
                } else if p > 0.0 {
                    base.push(i);
                }
            }
            emit(&base);
            if zero.is_empty() {
                continue;
            }
            let basis = complement_basis(&n);
            let proj: Vec<Vec<f64>> =
                zero.iter().map(|&i| basis.iter().map(|b| dot(&vecs[i], b)).collect()).collect();
            let mut buf = Vec::new();
            sides_rec(&proj, &mut |t| {
                buf.clear();
                buf.extend_from_slice(&base);
                buf.extend(t.iter().map(|&j| zero[j]));
                emit(&buf);
            });
            buf.clear();
            buf.extend_from_slice(&base);
            buf.extend_from_slice(&zero);
            emit(&buf);
        }
    }
}

fn check(vectors: &[Point]) -> Result<()> {
    for (i, v) in vectors.iter().enumerate() {
        if v.norm() == 0.0 {
            return Err(CivdError::SingularQuery(i));
        }
        v.check_dim(vectors[0].dim())?;
    }
    Ok(())
}

/// Calls `emit` with every subset of `vectors` that is the strict or closed
/// positive side of some hyperplane through the origin. Sets may repeat.
pub fn for_each_partition(vectors: &[Point], emit: &mut dyn FnMut(&[usize])) -> Result<()> {
    check(vectors)?;
    let vecs: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    sides_rec(&vecs, emit);
    Ok(())
}

/// The distinct subsets from [`for_each_partition`], each sorted.
pub fn enumerate_hyperplane_partitions(vectors: &[Point]) -> Result<Vec<Vec<usize>>> {
    let mut seen = HashSet::new();
    for_each_partition(vectors, &mut |s| {
        let mut s = s.to_vec();
        s.sort_unstable();
        seen.insert(s);
    })?;
    let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// The hyperplane-side subset with the longest vector sum, as a membership
/// mask, together with that length.
pub fn max_resultant(vectors: &[Point]) -> Result<(Vec<bool>, f64)> {
    check(vectors)?;
    let m = vectors.len();
    if m == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let dim = vectors[0].dim();
    if dim == 2 {
        return Ok(sweep_2d(vectors));
    }
    let mut best = (vec![false; m], -1.0);
    for_each_partition(vectors, &mut |s| {
        let mut acc = Point::origin(dim);
        for &i in s {
            acc = acc.add(&vectors[i]);
        }
        let len = acc.norm();
        if len > best.1 {
            let mut mask = vec![false; m];
            for &i in s {
                mask[i] = true;
            }
            best = (mask, len);
        }
    })?;
    Ok(best)
}

/// Rotates a half-plane normal once around the circle, updating the side's
/// vector sum as vectors enter and leave.
fn sweep_2d(vectors: &[Point]) -> (Vec<bool>, f64) {
    let m = vectors.len();
    let two_pi = 2.0 * PI;
    // (angle, vector, entering)
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * m);
    for (i, v) in vectors.iter().enumerate() {
        let theta = v.get(1).atan2(v.get(0));
        events.push(((theta - PI / 2.0).rem_euclid(two_pi), i, true));
        events.push(((theta + PI / 2.0).rem_euclid(two_pi), i, false));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut enter_at = vec![0usize; m];
    let mut leave_at = vec![0usize; m];
    for (pos, &(_, i, entering)) in events.iter().enumerate() {
        if entering {
            enter_at[i] = pos;
        } else {
            leave_at[i] = pos;
        }
    }
    // Before the first event, a vector is inside iff it entered during the previous turn.
    let mut inside: Vec<bool> = (0..m).map(|i| leave_at[i] < enter_at[i]).collect();
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in (0..m).filter(|&i| inside[i]) {
        sx += vectors[i].get(0);
        sy += vectors[i].get(1);
    }
    let mut best_len = sx.hypot(sy);
    let mut best = inside.clone();
    let mut g = 0;
    while g < events.len() {
        let mut h = g;
        while h < events.len() && events[h].0 == events[g].0 {
            h += 1;
        }
        let group = &events[g..h];
        let (mut lx, mut ly, mut ex, mut ey) = (0.0, 0.0, 0.0, 0.0);
        for &(_, i, entering) in group {
            if entering {
                ex += vectors[i].get(0);
                ey += vectors[i].get(1);
            } else {
                lx += vectors[i].get(0);
                ly += vectors[i].get(1);
            }
        }
        // Closed side at the critical angle, then the strict side.
        let closed = (sx + ex, sy + ey);
        let strict = (sx - lx, sy - ly);
        if closed.0.hypot(closed.1) > best_len {
            best_len = closed.0.hypot(closed.1);
            best = inside.clone();
            for &(_, i, entering) in group {
                if entering {
                    best[i] = true;
                }
            }
        }
        if strict.0.hypot(strict.1) > best_len {
            best_len = strict.0.hypot(strict.1);
            best = inside.clone();
            for &(_, i, entering) in group {
                if !entering {
                    best[i] = false;
                }
            }
        }
        for &(_, i, entering) in group {
            inside[i] = entering;
        }
        sx += ex - lx;
        sy += ey - ly;
        if sx.hypot(sy) > best_len {
            best_len = sx.hypot(sy);
            best = inside.clone();
        }
        g = h;
    }
    let (mut x, mut y) = (0.0, 0.0);
    for i in (0..m).filter(|&i| best[i]) {
        x += vectors[i].get(0);
        y += vectors[i].get(1);
    }
    (best, x.hypot(y))
}
