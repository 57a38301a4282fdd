//! SVD-backed rank, null-space and least-squares kernels.

use super::{CMat, RankTol, RowVec, C64};
use crate::error::{Error, Result};

/// `2^-48`, the unit used by the automatic rank threshold.
pub(crate) const AUTO_UNIT: f64 = 3.552713678800501e-15;

/// A singular value decomposition with singular values in decreasing order.
pub(crate) struct Svd {
    pub u: Option<CMat>,
    pub s: Vec<f64>,
    pub v_t: Option<CMat>,
}

pub(crate) fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full singular value decomposition (square `U` and `V^H`), singular values
/// in decreasing order.
pub(crate) fn svd(m: &CMat, want_u: bool, want_v: bool) -> Result<Svd> {
    let (r, c) = m.shape();
    let f = to_faer(m);
    let d = f
        .svd()
        .map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    let sd = d.S().column_vector();
    let raw: Vec<f64> = (0..r.min(c)).map(|i| sd[i].re).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        raw[b]
            .partial_cmp(&raw[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s = order.iter().map(|&i| raw[i]).collect();
    // Columns beyond min(r, c) are kept in place; only the leading ones move.
    let perm = |k: usize| if k < order.len() { order[k] } else { k };
    let u = want_u.then(|| {
        let fu = d.U();
        CMat::from_fn(r, r, |i, k| fu[(i, perm(k))])
    });
    let v_t = want_v.then(|| {
        let fv = d.V();
        CMat::from_fn(c, c, |k, j| fv[(j, perm(k))].conj())
    });
    Ok(Svd { u, s, v_t })
}

/// Singular values in decreasing order (length `min(rows, cols)`).
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    Ok(svd(m, false, false)?.s)
}

/// The absolute threshold used to decide rank for a matrix of this shape and
/// largest singular value.
pub fn rank_threshold(rows: usize, cols: usize, sigma_max: f64, tol: RankTol) -> f64 {
    match tol {
        RankTol::Auto => rows.max(cols) as f64 * sigma_max * AUTO_UNIT,
        RankTol::Absolute(t) => t,
    }
}

pub fn numerical_rank(m: &CMat, tol: RankTol) -> Result<usize> {
    let s = singular_values(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = rank_threshold(m.nrows(), m.ncols(), smax, tol);
    Ok(s.iter().filter(|&&x| x > thr).count())
}

/// Orthonormal basis (one vector per row) of `{ v : v M = 0 }`.
///
pub fn left_nullspace(m: &CMat, tol: RankTol) -> Result<CMat> {
    let (r, c) = m.shape();
    if r == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if c == 0 {
        return Ok(CMat::identity(r, r));
    }
    let d = svd(m, true, false)?;
    let u = d.u.expect("requested U");
    let s = &d.s;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let thr = rank_threshold(r, c, smax, tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    let mut out = CMat::zeros(r - rank, r);
    for (k, col) in (rank..r).enumerate() {
        for i in 0..r {
            out[(k, i)] = u[(i, col)].conj();
        }
    }
    Ok(out)
}

/// Left null space of `θI − M` at a computed eigenvalue `θ`.
///
/// `θ` is known to be an eigenvalue, so the kernel is never empty: when the
/// rank threshold rejects every singular value (rounding in `θ`), the
/// smallest left singular vector is returned.
pub fn eigen_left_nullspace(shifted: &CMat, tol: RankTol) -> Result<CMat> {
    let basis = left_nullspace(shifted, tol)?;
    if basis.nrows() > 0 || shifted.nrows() == 0 {
        return Ok(basis);
    }
    let d = svd(shifted, true, false)?;
    let u = d.u.expect("requested U");
    let r = shifted.nrows();
    let col = r - 1;
    Ok(CMat::from_fn(1, r, |_, i| u[(i, col)].conj()))
}

/// Orthonormal basis of the row space of `rows` (one vector per row).
pub fn row_basis(rows: &CMat, tol: RankTol) -> Result<CMat> {
    let (r, c) = rows.shape();
    if r == 0 || c == 0 {
        return Ok(CMat::zeros(0, c));
    }
    let d = svd(rows, false, true)?;
    let vt = d.v_t.expect("requested V^H");
    let s = &d.s;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let thr = rank_threshold(r, c, smax, tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    Ok(vt.rows(0, rank).into_owned())
}

/// Result of a minimum-norm least-squares solve of `x A = b`.
#[derive(Debug, Clone)]
pub struct LeftSolve {
    pub x: RowVec,
    /// `‖x A − b‖`.
    pub residual: f64,
    /// `‖x A − b‖ / max(‖b‖, ‖x‖‖A‖)`, 0 when both sides vanish.
    pub relative_residual: f64,
}

/// Minimum-norm least-squares solution of `x A = b` through the
/// pseudo-inverse, with singular values below the rank threshold discarded.
pub fn solve_left(a: &CMat, b: &RowVec, tol: RankTol) -> Result<LeftSolve> {
    let (r, c) = a.shape();
    if b.len() != c {
        return Err(Error::Dimension {
            matrix: "right-hand side".into(),
            detail: format!("expected length {c}, got {}", b.len()),
        });
    }
    if r == 0 {
        let residual = b.norm();
        return Ok(LeftSolve {
            x: RowVec::zeros(0),
            residual,
            relative_residual: if residual == 0.0 { 0.0 } else { 1.0 },
        });
    }
    // x A = b  ⇔  A^H x^H = b^H.
    let d = svd(a, true, true)?;
    let u = d.u.expect("requested U");
    let vt = d.v_t.expect("requested V^H");
    let s = &d.s;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let thr = rank_threshold(r, c, smax, tol);
    // A = U Σ V^H → x = b V Σ⁺ U^H.
    let bv = b * vt.adjoint();
    let mut scaled = RowVec::zeros(r);
    for k in 0..s.len() {
        if s[k] > thr {
            scaled[k] = bv[k] / s[k];
        }
    }
    let x = scaled * u.adjoint();
    let res = &x * a - b;
    let residual = res.norm();
    let denom = b.norm().max(x.norm() * smax);
    Ok(LeftSolve {
        x,
        residual,
        relative_residual: if denom == 0.0 { 0.0 } else { residual / denom },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::real;

    #[test]
    fn rank_of_simple_matrices() {
        let m = real(3, 3, &[1., 2., 3., 2., 4., 6., 1., 0., 1.]);
        assert_eq!(numerical_rank(&m, RankTol::Auto).unwrap(), 2);
        assert_eq!(
            numerical_rank(&CMat::zeros(2, 3), RankTol::Auto).unwrap(),
            0
        );
        assert_eq!(
            numerical_rank(&CMat::identity(4, 4), RankTol::Auto).unwrap(),
            4
        );
        let tiny = real(2, 2, &[1., 0., 0., 1e-6]);
        assert_eq!(numerical_rank(&tiny, RankTol::Absolute(1e-5)).unwrap(), 1);
        assert_eq!(numerical_rank(&tiny, RankTol::Auto).unwrap(), 2);
    }

    #[test]
    fn left_null_tall_and_wide() {
        let tall = real(3, 1, &[1., 1., 0.]);
        let n = left_nullspace(&tall, RankTol::Auto).unwrap();
        assert_eq!(n.nrows(), 2);
        assert!((&n * &tall).norm() < 1e-14);
        let wide = real(2, 3, &[1., 0., 0., 2., 0., 0.]);
        let n = left_nullspace(&wide, RankTol::Auto).unwrap();
        assert_eq!(n.nrows(), 1);
        assert!((&n * &wide).norm() < 1e-14);
        assert!((&n * n.adjoint() - CMat::identity(1, 1)).norm() < 1e-14);
    }

    #[test]
    fn solve_left_consistent_and_not() {
        let a = real(2, 2, &[2., 0., 0., 0.]);
        let b = RowVec::from_row_slice(&[C64::new(4.0, 0.0), C64::new(0.0, 0.0)]);
        let s = solve_left(&a, &b, RankTol::Auto).unwrap();
        assert!((s.x[0] - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!(s.x[1].norm() < 1e-14);
        assert!(s.residual < 1e-14);
        let b2 = RowVec::from_row_slice(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let s2 = solve_left(&a, &b2, RankTol::Auto).unwrap();
        assert!(s2.relative_residual > 0.5);
    }

    #[test]
    fn row_basis_dimension() {
        let m = real(3, 2, &[1., 1., 2., 2., 0., 0.]);
        let b = row_basis(&m, RankTol::Auto).unwrap();
        assert_eq!(b.nrows(), 1);
    }
}
