//! Kalman and PBH baselines on an assembled pair `(Φ, Ψ)`.

use super::{is_nonsingular, make_witness, Diagnostics, Method, Status, Verdict};
use crate::assemble::{layer_blocks, SampledSystem};
use crate::error::{Error, Result};
use crate::matops::linalg::{svd, AUTO_UNIT};
use crate::matops::{
    clustered_spectrum, eigen_left_nullspace, hcat, left_nullspace, numerical_rank, shifted, CMat,
    RankTol, RowVec, Tolerances,
};
use crate::netmodel::LayerSpec;

/// Amplification applied to the automatic unit inside the Krylov staircase,
/// which accumulates one projection error per step.
const STAIRCASE_SLACK: f64 = 16.0;

fn check_pair(phi: &CMat, psi: &CMat) -> Result<()> {
    if phi.nrows() != phi.ncols() {
        return Err(Error::NonSquare {
            rows: phi.nrows(),
            cols: phi.ncols(),
        });
    }
    if psi.nrows() != phi.nrows() {
        return Err(Error::Dimension {
            matrix: "input matrix".into(),
            detail: format!("{} rows, state has {}", psi.nrows(), phi.nrows()),
        });
    }
    Ok(())
}

fn spectral_norm(m: &CMat) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(m, false, false)?.s.first().copied().unwrap_or(0.0))
}

/// Orthogonal controllability staircase of `(Φ, Ψ)`.
#[derive(Debug, Clone)]
pub struct Staircase {
    /// Unitary `Q` (rows are the new coordinates): `Q Φ Q^H` is block upper
    /// Hessenberg with the reachable part in the leading `reach` coordinates.
    pub q: CMat,
    /// Dimension of the reachable subspace.
    pub reach: usize,
    /// Sizes of the staircase steps.
    pub steps: Vec<usize>,
    /// Smallest accepted step singular value relative to the norm of the
    /// matrix it was taken from (`Ψ` for the first step, `Φ` afterwards);
    /// values far below `√ε` mean the rank decision is ill-conditioned.
    pub weakest_step: f64,
}

impl Staircase {
    /// Orthonormal basis (columns) of the reachable subspace.
    pub fn reachable_basis(&self) -> CMat {
        self.q.rows(0, self.reach).adjoint()
    }
}

/// Orthogonal controllability staircase: at each step the coupling block into
/// the not-yet-reachable coordinates is compressed by an SVD and the whole
/// pair is transformed, so rank decisions are made on blocks of a unitarily
/// equivalent pair against one fixed threshold and no power of `Φ` is formed.
pub fn reachable_subspace(phi: &CMat, psi: &CMat, tol: RankTol) -> Result<Staircase> {
    staircase(phi, psi, tol, 0.0)
}

/// Relative staircase step size below which a rank decision is reported as
/// ill-conditioned.
const ILL_CONDITIONED: f64 = 1e-8;

/// Staircase in which, additionally, step singular values below `floor`
/// times the norm of their source matrix are treated as zero.
fn staircase(phi: &CMat, psi: &CMat, tol: RankTol, floor: f64) -> Result<Staircase> {
    check_pair(phi, psi)?;
    let d = phi.nrows();
    // The first step compresses Ψ, later ones compress blocks of Φ; each is
    // judged against its own norm so the decision ignores the scaling of Ψ.
    let (norm_phi, norm_psi) = (spectral_norm(phi)?, spectral_norm(psi)?);
    let thr = |scale: f64| match tol {
        RankTol::Auto => d.max(psi.ncols()) as f64 * scale * AUTO_UNIT * STAIRCASE_SLACK,
        RankTol::Absolute(t) => t,
    };
    let mut a = phi.clone();
    let mut q = CMat::identity(d, d);
    let mut coupling = psi.clone();
    let mut offset = 0usize;
    let mut steps = Vec::new();
    let mut weakest = f64::INFINITY;
    while offset < d {
        if coupling.ncols() == 0 {
            break;
        }
        let scale = if offset == 0 { norm_psi } else { norm_phi };
        let dec = svd(&coupling, true, false)?;
        let cut = thr(scale).max(floor * scale);
        let rank = dec.s.iter().filter(|&&x| x > cut).count();
        if rank == 0 {
            break;
        }
        weakest = weakest.min(dec.s[rank - 1] / scale);
        let u = dec.u.expect("requested U");
        let mut t = CMat::identity(d, d);
        t.view_mut((offset, offset), (d - offset, d - offset))
            .copy_from(&u.adjoint());
        a = &t * a * t.adjoint();
        q = &t * q;
        let prev = offset;
        offset += rank;
        steps.push(rank);
        if offset < d {
            coupling = a
                .view((offset, prev), (d - offset, offset - prev))
                .into_owned();
        }
    }
    Ok(Staircase {
        q,
        reach: offset,
        steps,
        weakest_step: weakest,
    })
}

/// Rank of the literal Kalman matrix `[Ψ, ΦΨ, …, Φ^{d−1}Ψ]` (diagnostic; its
/// conditioning degrades quickly with `d`).
pub fn kalman_matrix_rank(phi: &CMat, psi: &CMat, tol: RankTol) -> Result<usize> {
    check_pair(phi, psi)?;
    let d = phi.nrows();
    let mut blocks = Vec::with_capacity(d);
    let mut cur = psi.clone();
    for _ in 0..d {
        let next = phi * &cur;
        blocks.push(cur);
        cur = next;
    }
    numerical_rank(&hcat(&blocks.iter().collect::<Vec<_>>()), tol)
}

/// Kalman rank test with an unreachable-mode witness on failure.
pub fn kalman_test(sys: &SampledSystem, tol: &Tolerances) -> Result<Verdict> {
    kalman_pair(&sys.phi, &sys.psi, tol)
}

pub(crate) fn kalman_pair(phi: &CMat, psi: &CMat, tol: &Tolerances) -> Result<Verdict> {
    let d = phi.nrows();
    let mut stair = reachable_subspace(phi, psi, tol.rank)?;
    let mut diag = Diagnostics::new(d, tol);
    if stair.weakest_step < ILL_CONDITIONED {
        diag.notes.push(format!(
            "reachability rank decision is ill-conditioned (weakest staircase step {:.3e} relative)",
            stair.weakest_step
        ));
    }
    // Step sizes do not bound the distance to uncontrollability: a PBH vector
    // annihilating [θI − Φ, Ψ] to working precision is an unreachable mode
    // even when every step looks healthy. The weakest steps are then
    // discarded until the staircase agrees.
    if stair.reach == d && tol.rank == RankTol::Auto {
        let pbh = pbh_pair(phi, psi, tol)?;
        if pbh
            .witness
            .as_ref()
            .is_some_and(|w| w.residual <= tol.residual)
        {
            let mut floor = stair.weakest_step;
            while stair.reach == d && stair.weakest_step.is_finite() {
                floor = stair.weakest_step * (1.0 + 1e-9);
                stair = staircase(phi, psi, tol.rank, floor)?;
            }
            diag.notes.push(format!(
                "an exact PBH witness exists; staircase steps below {floor:.3e} relative were discarded"
            ));
        }
    }
    let r = stair.reach;
    diag.reach_rank = Some(r);
    let literal = kalman_matrix_rank(phi, psi, tol.rank)?;
    diag.ranks.push(("kalman_matrix".into(), literal));
    if literal != r {
        diag.notes.push(format!(
            "literal Kalman matrix rank {literal} differs from staircase rank {r}; the staircase is used"
        ));
    }
    let nonsingular = is_nonsingular(phi, tol)?;
    if r == d {
        if !nonsingular {
            diag.notes.push(
                "state matrix is singular; full reachability implies controllability to the origin"
                    .into(),
            );
        }
        return Ok(Verdict {
            status: Status::Controllable,
            method: Method::Kalman,
            witness: None,
            diagnostics: diag,
        });
    }
    // Rows orthogonal to the reachable subspace form a left-invariant subspace
    // of Φ; a left eigenvector of the compression is an unreachable mode.
    let comp = stair.q.rows(r, d - r).into_owned();
    let s = &comp * phi * comp.adjoint();
    let spec = clustered_spectrum(&s, tol)?;
    let mut witness = None;
    let mut unreachable_nonzero = false;
    let rho = spec.iter().map(|c| c.value.norm()).fold(0.0, f64::max);
    for c in &spec {
        if c.value.norm() > tol.eig_abs(rho.max(spectral_norm(phi)?)) {
            unreachable_nonzero = true;
        }
    }
    if let Some(first) = spec.first() {
        let y = eigen_left_nullspace(&shifted(first.value, &s), tol.rank)?;
        let w: RowVec = y.row(0) * &comp;
        witness = Some(make_witness(phi, psi, first.value, w, "unreachable mode"));
    }
    if !nonsingular {
        diag.notes.push(if unreachable_nonzero {
            "state matrix is singular; an unreachable mode with nonzero eigenvalue rules out controllability to the origin".into()
        } else {
            "state matrix is singular; every unreachable mode sits at 0, so the pair is controllable to the origin but not reachable".into()
        });
    }
    Ok(Verdict {
        status: Status::Uncontrollable,
        method: Method::Kalman,
        witness,
        diagnostics: diag,
    })
}

/// PBH rank test of `[θI − Φ, Ψ]` at every clustered eigenvalue of `Φ`.
pub fn pbh_test(sys: &SampledSystem, tol: &Tolerances) -> Result<Verdict> {
    pbh_pair(&sys.phi, &sys.psi, tol)
}

/// PBH test for an arbitrary pair (also used for topology screens and
/// single-node diagnostics).
pub fn pbh_pair(phi: &CMat, psi: &CMat, tol: &Tolerances) -> Result<Verdict> {
    check_pair(phi, psi)?;
    let d = phi.nrows();
    let mut diag = Diagnostics::new(d, tol);
    let spec = clustered_spectrum(phi, tol)?;
    let mut min_rank = d;
    let mut witness = None;
    for c in &spec {
        let m = hcat(&[&shifted(c.value, phi), psi]);
        let null = left_nullspace(&m, tol.rank)?;
        min_rank = min_rank.min(d - null.nrows());
        if null.nrows() > 0 && witness.is_none() {
            let w: RowVec = null.row(0).into_owned();
            witness = Some(make_witness(phi, psi, c.value, w, "PBH rank deficiency"));
        }
    }
    diag.ranks.push(("pbh_min_rank".into(), min_rank));
    let nonsingular = is_nonsingular(phi, tol)?;
    let status = if witness.is_some() {
        Status::Uncontrollable
    } else {
        if !nonsingular {
            diag.notes.push(
                "state matrix is singular; the full-rank PBH test certifies reachability, which implies controllability to the origin".into(),
            );
        }
        Status::Controllable
    };
    Ok(Verdict {
        status,
        method: Method::Pbh,
        witness,
        diagnostics: diag,
    })
}

/// PBH test of a single node `(e^{Ah}, ℬ(h))`.
pub fn node_pbh(layer: &LayerSpec, h: f64, tol: &Tolerances) -> Result<Verdict> {
    let b = layer_blocks(layer, h)?;
    pbh_pair(&b.exp_ah, &b.bcal, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::build_sampled;
    use crate::matops::real;
    use crate::netmodel::parse_network_spec;

    fn ex(k: usize) -> crate::netmodel::MultilayerNetwork {
        let text = match k {
            1 => include_str!("../../fixtures/example1.json"),
            2 => include_str!("../../fixtures/example2.json"),
            3 => include_str!("../../fixtures/example3.json"),
            _ => include_str!("../../fixtures/example4.json"),
        };
        parse_network_spec(text).unwrap()
    }

    #[test]
    fn zero_input_has_rank_zero() {
        let phi = real(2, 2, &[0.5, 1.0, 0.0, 0.3]);
        let psi = CMat::zeros(2, 1);
        let v = kalman_pair(&phi, &psi, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Uncontrollable);
        assert_eq!(v.diagnostics.reach_rank, Some(0));
        assert!(v.witness.unwrap().residual < 1e-12);
    }

    #[test]
    fn companion_pair_is_controllable() {
        let phi = real(3, 3, &[0., 1., 0., 0., 0., 1., 0.2, -0.1, 0.5]);
        let psi = real(3, 1, &[0., 0., 1.]);
        let v = kalman_pair(&phi, &psi, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Controllable);
        assert_eq!(v.diagnostics.reach_rank, Some(3));
        let p = pbh_pair(&phi, &psi, &Tolerances::default()).unwrap();
        assert_eq!(p.status, Status::Controllable);
    }

    #[test]
    fn example_ranks() {
        let t = Tolerances::default();
        let r = |k: usize, h: f64| {
            let sys = build_sampled(&ex(k), h).unwrap();
            kalman_test(&sys, &t).unwrap()
        };
        let v1 = r(1, 0.1);
        assert_eq!(v1.diagnostics.reach_rank, Some(8));
        assert_eq!(v1.diagnostics.ranks[0].1, 8);
        let v3 = r(3, std::f64::consts::FRAC_PI_2);
        assert_eq!(v3.diagnostics.reach_rank, Some(8));
        let v4 = r(4, std::f64::consts::PI);
        assert_eq!(v4.diagnostics.reach_rank, Some(7));
        assert_eq!(v4.diagnostics.ranks[0].1, 7);
        let w = v4.witness.unwrap();
        assert!(w.residual < 1e-10, "{}", w.residual);
        let v4b = r(4, std::f64::consts::FRAC_PI_2);
        assert_eq!(v4b.diagnostics.reach_rank, Some(8));
    }

    #[test]
    fn pbh_agrees_on_examples() {
        let t = Tolerances::default();
        for (k, h) in [
            (1, 0.1),
            (2, std::f64::consts::PI),
            (3, std::f64::consts::FRAC_PI_2),
            (4, std::f64::consts::PI),
        ] {
            let sys = build_sampled(&ex(k), h).unwrap();
            let a = kalman_test(&sys, &t).unwrap();
            let b = pbh_test(&sys, &t).unwrap();
            assert_eq!(a.status, b.status, "example {k}");
        }
    }

    #[test]
    fn single_node_deficiency_example_two() {
        let net = ex(2);
        let v = node_pbh(net.layer(1), std::f64::consts::PI, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Uncontrollable);
        let w = v.witness.unwrap();
        assert!((w.eigenvalue.re + 23.1407).abs() < 1e-3);
    }

    #[test]
    fn exact_pbh_witness_overrides_healthy_looking_staircase() {
        // Integer network whose staircase steps all exceed 1e-7 relative while
        // an eigenvector annihilates [θI − Φ, Ψ] to rounding.
        let net = parse_network_spec(r#"{"layers":[
            {"A":[[-2,1,1],[0,0,-2],[1,-2,1]],"B":[[0],[2],[-1]],"C":[[-2,1,0]],"H":[[-1],[-2],[2]],
             "W":[[0,1,0,1],[0,0,1,1],[0,0,0,1],[0,1,0,0]],"delta":[0,0,1,0]},
            {"A":[[-2,-2,1],[-1,0,0],[1,0,2]],"B":[[0],[-2],[1]],"C":[[-1,1,0]],"H":[[2],[0],[-2]],
             "W":[[0,0,0,0],[1,0,0,1],[1,1,0,0],[0,0,0,0]],"delta":[0,1,1,1]}],
            "couplings":[{"to":2,"from":1,"D":[[0,0,0,0],[0,0,1,0],[1,0,0,1],[0,1,0,0]],"P":[[0],[-2],[1]]}]}"#)
        .unwrap();
        let sys = build_sampled(&net, 0.8942134763367554).unwrap();
        let t = Tolerances::default();
        assert_eq!(
            reachable_subspace(&sys.phi, &sys.psi, t.rank)
                .unwrap()
                .reach,
            24
        );
        let p = pbh_test(&sys, &t).unwrap();
        assert_eq!(p.status, Status::Uncontrollable);
        let k = kalman_test(&sys, &t).unwrap();
        assert_eq!(k.status, Status::Uncontrollable);
        assert!(k.diagnostics.reach_rank.unwrap() < 24);
        assert!(k.witness.unwrap().residual < 1e-9);
    }
}
