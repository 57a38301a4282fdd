//! Eigenvalues and defect-aware eigenvalue clustering.
//!
//! Backward-stable eigensolvers scatter a defective eigenvalue of index `k`
//! into a ring of radius roughly `ε^(1/k)`. A plain distance threshold would
//! report those as distinct eigenvalues, so candidate groups are additionally
//! accepted when the powers of `μI − M` at the group mean `μ` show a Jordan
//! nullity staircase reaching `k` (the mean of a scattered ring is accurate even when the
//! individual members are not).

use std::cmp::Ordering;

use super::linalg::{rank_threshold, singular_values};
use super::{shifted, CMat, RankTol, Tolerances, C64};
use crate::error::{Error, Result};

/// An eigenvalue together with its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigencluster {
    pub value: C64,
    pub multiplicity: usize,
}

/// Relative threshold for the null-space test of a candidate cluster. It is
/// looser than the rank threshold because `μ` carries the rounding error of
/// the eigensolver.
const DEFECT_UNIT: f64 = 9.094947017729282e-13; // 2^-40

/// Raw eigenvalues (complex Schur form, unordered).
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NonSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    super::linalg::to_faer(m)
        .eigenvalues()
        .map_err(|_| Error::NoConvergence("eigenvalue decomposition"))
}

/// Ordering used for every reported spectrum: by magnitude, then by phase.
pub fn spectral_order(a: &C64, b: &C64) -> Ordering {
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() > 1e-12 * ma.max(mb).max(1.0) {
        return ma.partial_cmp(&mb).unwrap_or(Ordering::Equal);
    }
    a.arg().partial_cmp(&b.arg()).unwrap_or(Ordering::Equal)
}

/// Merge already-accurate eigenvalues (with multiplicities) lying within
/// `abs_tol` of each other (single linkage), using weighted means.
pub fn cluster_values(values: &[(C64, usize)], abs_tol: f64) -> Vec<Eigencluster> {
    let comps = components(&values.iter().map(|v| v.0).collect::<Vec<_>>(), abs_tol);
    let mut out: Vec<Eigencluster> = comps
        .into_iter()
        .map(|idx| {
            let mult: usize = idx.iter().map(|&i| values[i].1).sum();
            let sum: C64 = idx.iter().map(|&i| values[i].0 * values[i].1 as f64).sum();
            Eigencluster {
                value: sum / mult as f64,
                multiplicity: mult,
            }
        })
        .collect();
    out.sort_by(|a, b| spectral_order(&a.value, &b.value));
    out
}

/// Distinct eigenvalues of `m` with algebraic multiplicities.
pub fn clustered_spectrum(m: &CMat, tol: &Tolerances) -> Result<Vec<Eigencluster>> {
    let raw = eigenvalues(m)?;
    let n = raw.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let rho = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let base = tol.eig_abs(rho);
    let kappa = m.norm().max(1.0);
    let ring = |k: usize| 8.0 * (f64::EPSILON * kappa * n as f64).powf(1.0 / k as f64) * kappa;
    let link = base.max(ring(n));
    let mut accepted: Vec<Vec<usize>> = Vec::new();
    let mut stack = components(&raw, link);
    while let Some(group) = stack.pop() {
        if group.len() == 1 {
            accepted.push(group);
            continue;
        }
        let mu = mean(&raw, &group);
        let radius = group
            .iter()
            .map(|&i| (raw[i] - mu).norm())
            .fold(0.0, f64::max);
        let defective = || -> Result<bool> {
            Ok(match defect_index(m, mu, group.len())? {
                Some(j) => radius <= ring(j),
                None => false,
            })
        };
        if radius <= base || defective()? {
            accepted.push(group);
            continue;
        }
        let (a, b) = split_at_longest_edge(&raw, &group);
        stack.push(a);
        stack.push(b);
    }
    let mut out: Vec<Eigencluster> = accepted
        .into_iter()
        .map(|g| Eigencluster {
            value: clean(mean(&raw, &g), base),
            multiplicity: g.len(),
        })
        .collect();
    out.sort_by(|a, b| spectral_order(&a.value, &b.value));
    Ok(out)
}

/// Snap negligible real or imaginary parts to zero so that real eigenvalues of
/// real matrices are reported as real.
fn clean(z: C64, base: f64) -> C64 {
    let eps = base * 1e-3;
    C64::new(
        if z.re.abs() <= eps { 0.0 } else { z.re },
        if z.im.abs() <= eps { 0.0 } else { z.im },
    )
}

fn mean(raw: &[C64], idx: &[usize]) -> C64 {
    idx.iter().map(|&i| raw[i]).sum::<C64>() / idx.len() as f64
}

/// Nullity staircase of `(μI − M)^j`, `j = 1..k`. A group of `k` computed
/// eigenvalues is one defective eigenvalue only if the staircase looks like a
/// Jordan structure: nonzero nullity already at `j = 1`, non-increasing
/// increments, reaching `k`. Returns the power at which it saturates.
fn defect_index(m: &CMat, mu: C64, k: usize) -> Result<Option<usize>> {
    let p = shifted(mu, m);
    let pn = p.norm();
    let mut pk = p.clone();
    let mut prev = 0usize;
    let mut prev_step = usize::MAX;
    for j in 1..=k {
        if j > 1 {
            pk = &pk * &p;
        }
        let s = singular_values(&pk)?;
        let smax = s.first().copied().unwrap_or(0.0).max(pn.powi(j as i32));
        let thr = rank_threshold(m.nrows(), m.ncols(), smax, RankTol::Auto)
            / super::linalg::AUTO_UNIT
            * DEFECT_UNIT;
        let nullity = s.iter().filter(|&&x| x <= thr).count();
        let step = nullity.saturating_sub(prev);
        if nullity < prev || step == 0 || step > prev_step || nullity > k {
            return Ok(None);
        }
        if nullity == k {
            return Ok(Some(j));
        }
        prev = nullity;
        prev_step = step;
    }
    Ok(None)
}

/// Connected components of the graph joining points within `radius`.
fn components(points: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let nx = p[j];
            p[j] = r;
            j = nx;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Split a group into the two components left after removing the longest
/// edge of its minimum spanning tree.
fn split_at_longest_edge(raw: &[C64], group: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = group.len();
    // Prim's algorithm on the complete graph.
    let mut in_tree = vec![false; k];
    let mut best = vec![f64::INFINITY; k];
    let mut from = vec![0usize; k];
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(k - 1);
    best[0] = 0.0;
    for step in 0..k {
        let u = (0..k)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].partial_cmp(&best[b]).unwrap_or(Ordering::Equal))
            .expect("non-empty");
        in_tree[u] = true;
        if step > 0 {
            edges.push((from[u], u, best[u]));
        }
        for v in 0..k {
            if !in_tree[v] {
                let d = (raw[group[u]] - raw[group[v]]).norm();
                if d < best[v] {
                    best[v] = d;
                    from[v] = u;
                }
            }
        }
    }
    let cut = edges
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap_or(Ordering::Equal))
        .map(|(i, _)| i)
        .expect("at least one edge");
    // Flood fill from the first endpoint of the cut edge without using it.
    let mut adj = vec![Vec::new(); k];
    for (i, &(a, b, _)) in edges.iter().enumerate() {
        if i != cut {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut side = vec![false; k];
    let mut todo = vec![edges[cut].0];
    side[edges[cut].0] = true;
    while let Some(u) = todo.pop() {
        for &v in &adj[u] {
            if !side[v] {
                side[v] = true;
                todo.push(v);
            }
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..k {
        if side[i] {
            a.push(group[i]);
        } else {
            b.push(group[i]);
        }
    }
    (a, b)
}
