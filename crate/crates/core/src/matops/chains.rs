//! Left Jordan chains and generalized left chains.
//!
//! A left Jordan chain of `W` at `λ` is `v(1), …, v(α)` with
//! `v(1)(λI − W) = 0` and `v(k)(W − λI) = v(k−1)`.
//! A generalized left chain of the pair `(E, Hc)` at `θ` is
//! `ξ(1), …, ξ(γ)` with `ξ(1)(θI − E) = 0` and
//! `ξ(k)(θI − E) = ξ(k−1) Hc`.

use super::linalg::{left_nullspace, rank_threshold, row_basis, singular_values, solve_left};
use super::spectrum::clustered_spectrum;
use super::{gauge_factor, shifted, stack_rows, CMat, RankTol, RowVec, Tolerances, C64};
use crate::error::{Error, Result};

/// All left Jordan chains of one eigenvalue.
#[derive(Debug, Clone)]
pub struct ChainFamily {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    /// Each chain is ordered `v(1), v(2), …`.
    pub chains: Vec<Vec<RowVec>>,
}

impl ChainFamily {
    pub fn geometric_multiplicity(&self) -> usize {
        self.chains.len()
    }
    pub fn longest(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Generalized chains at one eigenvalue `θ` of `E`.
///
/// Chains are reported without trailing zero vectors. When the last vector
/// satisfies `ξ(γ) Hc = 0` the recursion admits the zero continuation; such
/// chains are flagged in `zero_extendable` because eigenvector constructions
/// may pad them with zeros.
#[derive(Debug, Clone)]
pub struct GeneralizedChainFamily {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    pub chains: Vec<Vec<RowVec>>,
    pub zero_extendable: Vec<bool>,
}

/// Split a (possibly zero-padded) chain into its nonzero prefix and whether a
/// zero tail was present.
pub fn trim_chain(chain: &[RowVec]) -> (Vec<RowVec>, bool) {
    let head = chain[0].norm();
    let mut len = chain.len();
    while len > 1 && chain[len - 1].norm() <= 1e-12 * head {
        len -= 1;
    }
    (chain[..len].to_vec(), len < chain.len())
}

fn power(p: &CMat, k: usize) -> CMat {
    let n = p.nrows();
    let mut out = CMat::identity(n, n);
    for _ in 0..k {
        out = &out * p;
    }
    out
}

/// Nullity of `P^k` with a threshold referenced to `scale^k`, where `scale`
/// is the magnitude of the matrix `P` was shifted from: a nearly vanishing
/// shift (e.g. of a scalar matrix) is judged on the scale of the original.
fn nullity_of_power(
    p: &CMat,
    k: usize,
    tol: RankTol,
    scale: f64,
) -> Result<(usize, Vec<f64>, CMat)> {
    let pk = power(p, k);
    let s = singular_values(&pk)?;
    let smax = s.first().copied().unwrap_or(0.0).max(scale.powi(k as i32));
    let thr = match tol {
        RankTol::Auto => rank_threshold(p.nrows(), p.ncols(), smax, tol) * 256.0,
        RankTol::Absolute(_) => rank_threshold(p.nrows(), p.ncols(), smax, tol),
    };
    let nullity = s.iter().filter(|&&x| x <= thr).count();
    Ok((nullity, s, pk))
}

fn ambiguity(lambda: C64, s: Vec<f64>) -> Error {
    Error::ChainAmbiguity {
        eigenvalue: lambda,
        singular_values: s,
    }
}

/// Left Jordan chains of `w` at one eigenvalue of known algebraic
/// multiplicity.
pub fn left_jordan_chains_at(
    w: &CMat,
    lambda: C64,
    multiplicity: usize,
    tol: &Tolerances,
) -> Result<ChainFamily> {
    let n = w.nrows();
    // P = W − λI, so that v(k) P = v(k−1).
    let p = -shifted(lambda, w);
    let scale = w.norm().max(lambda.norm());
    let mut dims = vec![0usize];
    let mut null_bases: Vec<CMat> = vec![CMat::zeros(0, n)];
    let mut last_s = Vec::new();
    for k in 1..=multiplicity {
        let (d, s, pk) = nullity_of_power(&p, k, tol.rank, scale)?;
        last_s = s.clone();
        if d < *dims.last().expect("nonempty") || d > multiplicity {
            return Err(ambiguity(lambda, s));
        }
        if d == *dims.last().expect("nonempty") {
            break;
        }
        // Null basis with exactly `d` rows: the trailing left singular vectors.
        let thr = threshold_for_count(&s, d);
        let basis = left_nullspace(&pk, RankTol::Absolute(thr))?;
        if basis.nrows() != d {
            return Err(ambiguity(lambda, s));
        }
        dims.push(d);
        null_bases.push(basis);
        if d == multiplicity {
            break;
        }
    }
    let depth = dims.len() - 1;
    if dims[depth] != multiplicity {
        return Err(ambiguity(lambda, last_s));
    }
    // g[k] = number of chains of length ≥ k.
    let g: Vec<usize> = (0..=depth + 1)
        .map(|k| {
            if k == 0 || k > depth {
                0
            } else {
                dims[k] - dims[k - 1]
            }
        })
        .collect();
    for k in 1..depth {
        if g[k + 1] > g[k] {
            return Err(ambiguity(lambda, last_s));
        }
    }
    let mut tops: Vec<(RowVec, usize)> = Vec::new();
    for len in (1..=depth).rev() {
        let needed = g[len] - g[len + 1];
        if needed == 0 {
            continue;
        }
        // Span to avoid: ker P^{len−1} plus images of longer chains.
        let mut avoid: Vec<RowVec> = (0..null_bases[len - 1].nrows())
            .map(|i| null_bases[len - 1].row(i).into_owned())
            .collect();
        for (t, l) in &tops {
            avoid.push(t * power(&p, l - len));
        }
        let q = row_basis(&stack_rows(&avoid, n), tol.rank)?;
        let b = &null_bases[len];
        let projected = b - (b * q.adjoint()) * &q;
        let comp =
            row_basis_count(&projected, needed).ok_or_else(|| ambiguity(lambda, last_s.clone()))?;
        for i in 0..needed {
            tops.push((comp.row(i).into_owned(), len));
        }
    }
    let mut chains = Vec::with_capacity(tops.len());
    for (top, len) in tops {
        let mut chain = vec![top];
        for _ in 1..len {
            let prev = chain.last().expect("nonempty") * &p;
            chain.push(prev);
        }
        chain.reverse();
        let f = gauge_factor(&chain[0]);
        chains.push(chain.into_iter().map(|v| v * f).collect());
    }
    Ok(ChainFamily {
        eigenvalue: lambda,
        multiplicity,
        chains,
    })
}

/// Threshold sitting in the gap just above the `count` smallest singular
/// values (geometric mean of the two neighbours).
fn threshold_for_count(s: &[f64], count: usize) -> f64 {
    let n = s.len();
    if count == 0 {
        return 0.0;
    }
    let inside = s[n - count];
    let outside = if count < n {
        s[n - count - 1]
    } else {
        f64::INFINITY
    };
    if outside.is_infinite() {
        return f64::INFINITY;
    }
    if inside == 0.0 {
        return outside * 1e-8;
    }
    (inside * outside).sqrt()
}

/// The `count` dominant right singular directions of `rows`, provided they
/// are clearly separated from the rest.
fn row_basis_count(rows: &CMat, count: usize) -> Option<CMat> {
    if rows.nrows() == 0 {
        return None;
    }
    let d = super::linalg::svd(rows, false, true).ok()?;
    let vt = d.v_t?;
    let s = &d.s;
    if s.len() < count || s[count - 1] <= 1e-8 {
        return None;
    }
    if s.len() > count && s[count] > 1e-6 * s[count - 1].max(1.0) {
        return None;
    }
    Some(vt.rows(0, count).into_owned())
}

/// Left Jordan chains of every eigenvalue of `w`.
pub fn left_jordan_chains(w: &CMat, tol: &Tolerances) -> Result<Vec<ChainFamily>> {
    if w.nrows() != w.ncols() {
        return Err(Error::NonSquare {
            rows: w.nrows(),
            cols: w.ncols(),
        });
    }
    clustered_spectrum(w, tol)?
        .into_iter()
        .map(|c| left_jordan_chains_at(w, c.value, c.multiplicity, tol))
        .collect()
}

/// Generalized left chains of `(e, hc)` at `θ`, never longer than `max_len`.
///
/// Heads admitting a chain of length `k` form a subspace `S_k` of the left
/// kernel of `θI − E` (`S_1 ⊇ S_2 ⊇ …`); it is computed from the joint
/// block-bidiagonal system in the unknowns `(c, ξ(2), …, ξ(k))` with
/// `ξ(1) = cY`. Heads are then chosen adapted to this flag (longest chains
/// first), so a head that extends is never hidden inside a combination that
/// does not.
pub fn generalized_chains_at(
    e: &CMat,
    hc: &CMat,
    theta: C64,
    tol: &Tolerances,
    max_len: usize,
) -> Result<Vec<Vec<RowVec>>> {
    let n = e.nrows();
    let shift = shifted(theta, e);
    let (d, s, _) = nullity_of_power(&shift, 1, tol.rank, e.norm().max(theta.norm()))?;
    if d == 0 {
        return Err(ambiguity(theta, s));
    }
    let y = left_nullspace(&shift, RankTol::Absolute(threshold_for_count(&s, d)))?;
    let g = y.nrows();
    let max_len = max_len.max(1);
    let yhc = &y * hc;
    // flags[k-1]: orthonormal basis (rows, in c-coordinates) of S_k.
    let mut flags: Vec<CMat> = vec![CMat::identity(g, g)];
    for k in 2..=max_len {
        let m = k - 1;
        let mut t = CMat::zeros(g + m * n, m * n);
        t.view_mut((0, 0), (g, n)).copy_from(&(-&yhc));
        for a in 0..m {
            t.view_mut((g + a * n, a * n), (n, n)).copy_from(&shift);
            if a + 1 < m {
                t.view_mut((g + a * n, (a + 1) * n), (n, n))
                    .copy_from(&(-hc));
            }
        }
        let null = left_nullspace(&t, tol.rank)?;
        let cpart = null.columns(0, g).into_owned();
        let sk = row_basis(&cpart, RankTol::Absolute(1e-8))?;
        if sk.nrows() == 0 {
            break;
        }
        flags.push(sk);
    }
    // Heads: for each length from the longest down, complete the chosen
    // heads to a basis of S_k.
    let mut heads: Vec<(RowVec, usize)> = Vec::new();
    for len in (1..=flags.len()).rev() {
        let sk = &flags[len - 1];
        let have = heads.len();
        let needed = sk.nrows().saturating_sub(have);
        if needed == 0 {
            continue;
        }
        let chosen: Vec<RowVec> = heads.iter().map(|(c, _)| c.clone()).collect();
        let projected = if chosen.is_empty() {
            sk.clone()
        } else {
            let q = row_basis(&stack_rows(&chosen, g), RankTol::Auto)?;
            sk - (sk * q.adjoint()) * &q
        };
        let comp = row_basis(&projected, RankTol::Absolute(1e-8))?;
        for i in 0..needed.min(comp.nrows()) {
            heads.push((comp.row(i).into_owned(), len));
        }
    }
    let scale = e.norm().max(hc.norm()).max(theta.norm()).max(1.0);
    let mut out = Vec::with_capacity(heads.len());
    for (c, len) in heads {
        let mut head = &c * &y;
        head *= gauge_factor(&head);
        let mut chain = vec![head.clone()];
        if len > 1 {
            // Fixed head: solve for ξ(2..len) jointly (minimum norm).
            let m = len - 1;
            let mut t = CMat::zeros(m * n, m * n);
            for a in 0..m {
                t.view_mut((a * n, a * n), (n, n)).copy_from(&shift);
                if a + 1 < m {
                    t.view_mut((a * n, (a + 1) * n), (n, n)).copy_from(&(-hc));
                }
            }
            let mut rhs = RowVec::zeros(m * n);
            rhs.columns_mut(0, n).copy_from(&(&head * hc));
            let sol = solve_left(&t, &rhs, tol.rank)?;
            let allowed = tol.residual * scale * sol.x.norm().max(head.norm()).max(1.0);
            if sol.residual <= allowed {
                chain.extend((0..m).map(|a| sol.x.columns(a * n, n).into_owned()));
            }
        }
        out.push(chain);
    }
    Ok(out)
}

/// Generalized chains for every eigenvalue of `e`.
pub fn generalized_left_jordan_chains(
    e: &CMat,
    hc: &CMat,
    tol: &Tolerances,
    max_len: usize,
) -> Result<Vec<GeneralizedChainFamily>> {
    if e.nrows() != e.ncols() || hc.shape() != e.shape() {
        return Err(Error::Dimension {
            matrix: "E/Hc".into(),
            detail: format!("E is {:?}, Hc is {:?}", e.shape(), hc.shape()),
        });
    }
    clustered_spectrum(e, tol)?
        .into_iter()
        .map(|c| {
            let raw = generalized_chains_at(e, hc, c.value, tol, max_len)?;
            let (chains, zero_extendable) = raw.iter().map(|ch| trim_chain(ch)).unzip();
            Ok(GeneralizedChainFamily {
                eigenvalue: c.value,
                multiplicity: c.multiplicity,
                chains,
                zero_extendable,
            })
        })
        .collect()
}
