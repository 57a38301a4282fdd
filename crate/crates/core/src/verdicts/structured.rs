//! Two-layer decompositions: drive-response (single- and multi-rate),
//! homogeneous networks and the topology screens.

use super::baseline::{kalman_pair, pbh_pair};
use super::{
    first_failure, is_nonsingular, make_witness, Diagnostics, LayerCheck, Method, Status, Verdict,
    Witness,
};
use crate::assemble::{build_sampled, lift_multirate, Pattern};
use crate::error::{Error, Result};
use crate::matops::linalg::svd;
use crate::matops::{
    block_diag, cluster_values, clustered_spectrum, eigen_left_nullspace, from_real, hcat,
    kron_row, left_nullspace, shifted, vcat, CMat, RankTol, RowVec, Tolerances, C64,
};
use crate::netmodel::{classify_structure, MultilayerNetwork, StructureTag};
use crate::spectra::{
    eigenspace_entry, homogeneous_eigenspace, layer_eigenspaces, EigenspaceEntry,
};

/// `2^-40`: unit for rank decisions on products with computed eigenbases,
/// which carry more rounding than a single factorisation.
const REDUCED_UNIT: f64 = 9.094947017729282e-13;

/// Absolute rank threshold for a reduced matrix whose natural scale is that
/// of the unreduced operator.
pub(crate) fn reduced_threshold(tol: &Tolerances, rows: usize, cols: usize, scale: f64) -> RankTol {
    match tol.rank {
        RankTol::Auto => {
            RankTol::Absolute(rows.max(cols) as f64 * scale.max(f64::MIN_POSITIVE) * REDUCED_UNIT)
        }
        abs => abs,
    }
}

fn pad(v: &RowVec, before: usize, after: usize) -> RowVec {
    let zero = C64::new(0.0, 0.0);
    RowVec::from_iterator(
        before + v.len() + after,
        std::iter::repeat_n(zero, before)
            .chain(v.iter().copied())
            .chain(std::iter::repeat_n(zero, after)),
    )
}

/// Result of evaluating both decomposed conditions on a block
/// lower-triangular pair.
pub(crate) struct TwoLayerOutcome {
    pub complete: bool,
    pub failures: Vec<Witness>,
    pub layer_checks: Vec<LayerCheck>,
    pub notes: Vec<String>,
}

/// Conditions on `Φ = [[Φ11, 0], [Φ21, Φ22]]`, `Ψ = diag(Ψ11, Ψ22)`:
///
/// 1. every `η ∈ M(θ | Φ11)` has `η Ψ11 ≠ 0`;
/// 2. no `(ξ, η ≠ 0)` with `η ∈ M(θ | Φ22)`, `ξ(θI − Φ11) = η Φ21`,
///    `ξ Ψ11 = 0`, `η Ψ22 = 0`.
pub(crate) fn two_layer_conditions(
    phi: &CMat,
    psi: &CMat,
    n1: usize,
    m1: usize,
    spaces1: &[EigenspaceEntry],
    spaces2: &[EigenspaceEntry],
    tol: &Tolerances,
) -> Result<TwoLayerOutcome> {
    let d = phi.nrows();
    let n2 = d - n1;
    let m2 = psi.ncols() - m1;
    let phi11 = phi.view((0, 0), (n1, n1)).into_owned();
    let phi21 = phi.view((n1, 0), (n2, n1)).into_owned();
    let psi11 = psi.view((0, 0), (n1, m1)).into_owned();
    let psi22 = psi.view((n1, m1), (n2, m2)).into_owned();
    let scale = phi.norm().max(psi.norm()).max(1.0);
    let mut out = TwoLayerOutcome {
        complete: true,
        failures: Vec::new(),
        layer_checks: Vec::new(),
        notes: Vec::new(),
    };

    for e in spaces1 {
        if !e.complete {
            out.complete = false;
            out.notes.push(format!(
                "layer-1 eigenbasis at {} spans {} of {} dimensions",
                e.theta,
                e.basis.nrows(),
                e.direct_dim
            ));
        }
        let prod = &e.basis * &psi11;
        let thr = reduced_threshold(tol, prod.nrows(), prod.ncols(), scale);
        let null = left_nullspace(&prod, thr)?;
        let witness = (null.nrows() > 0).then(|| null.row(0) * &e.basis);
        if let Some(eta) = &witness {
            out.failures.push(make_witness(
                phi,
                psi,
                e.theta,
                pad(eta, 0, n2),
                "condition 1",
            ));
        }
        out.layer_checks.push(LayerCheck {
            layer: 1,
            eigenvalue: e.theta,
            passed: witness.is_none(),
            witness,
        });
    }

    for e in spaces2 {
        if !e.complete {
            out.complete = false;
            out.notes.push(format!(
                "layer-2 eigenbasis at {} spans {} of {} dimensions",
                e.theta,
                e.basis.nrows(),
                e.direct_dim
            ));
        }
        let y = &e.basis;
        let q = y.nrows();
        // Intra-layer diagnostic: η Ψ22 = 0 on the response layer alone.
        let prod = y * &psi22;
        let thr = reduced_threshold(tol, prod.nrows(), prod.ncols(), scale);
        let intra = left_nullspace(&prod, thr)?;
        out.layer_checks.push(LayerCheck {
            layer: 2,
            eigenvalue: e.theta,
            passed: intra.nrows() == 0,
            witness: (intra.nrows() > 0).then(|| crate::matops::gauge(&(intra.row(0) * y))),
        });
        // Unknowns (ξ, c) with η = c Y.
        let top = hcat(&[&shifted(e.theta, &phi11), &psi11, &CMat::zeros(n1, m2)]);
        let bottom = hcat(&[&-(y * &phi21), &CMat::zeros(q, m1), &prod]);
        let stacked = vcat(&[&top, &bottom]);
        let thr = reduced_threshold(tol, stacked.nrows(), stacked.ncols(), scale);
        let null = left_nullspace(&stacked, thr)?;
        if null.nrows() == 0 {
            continue;
        }
        let cpart = null.columns(n1, q).into_owned();
        let sv = svd(&cpart, true, false)?;
        if sv.s.first().copied().unwrap_or(0.0) <= 1e-8 {
            // Only ξ-solutions: those are condition-1 failures at θ.
            continue;
        }
        let u = sv.u.expect("requested U");
        let combo: RowVec = u.column(0).adjoint();
        let z = combo * &null;
        let xi = z.columns(0, n1).into_owned();
        let eta = z.columns(n1, q).into_owned() * y;
        let w = RowVec::from_iterator(d, xi.iter().chain(eta.iter()).copied());
        out.failures
            .push(make_witness(phi, psi, e.theta, w, "condition 2"));
    }
    Ok(out)
}

fn require_drive_response(net: &MultilayerNetwork, tol: &Tolerances) -> Result<StructureTag> {
    let tag = classify_structure(net, tol.eig);
    if !tag.is_drive_response() {
        return Err(Error::Structure(format!(
            "drive-response structure required, network is '{}'",
            tag.name()
        )));
    }
    Ok(tag)
}

fn outcome_verdict(
    method: Method,
    outcome: TwoLayerOutcome,
    mut diag: Diagnostics,
) -> (Verdict, bool) {
    diag.layer_checks = outcome.layer_checks;
    diag.notes.extend(outcome.notes);
    let failed = !outcome.failures.is_empty();
    let witness = first_failure(outcome.failures);
    let status = if failed || !outcome.complete {
        Status::Inconclusive
    } else {
        Status::Controllable
    };
    (
        Verdict {
            status,
            method,
            witness,
            diagnostics: diag,
        },
        failed,
    )
}

/// Two-layer drive-response decomposition. A violation is upgraded to
/// `Uncontrollable` when `Φ_s` is nonsingular.
pub fn drive_response_test(net: &MultilayerNetwork, h: f64, tol: &Tolerances) -> Result<Verdict> {
    require_drive_response(net, tol)?;
    let sys = build_sampled(net, h)?;
    let spaces1 = layer_eigenspaces(net.layer(1), h, tol)?;
    let spaces2 = layer_eigenspaces(net.layer(2), h, tol)?;
    let n1 = sys.index.state_range(1).len();
    let m1 = sys.index.input_range(1).len();
    let outcome = two_layer_conditions(&sys.phi, &sys.psi, n1, m1, &spaces1, &spaces2, tol)?;
    let mut diag = Diagnostics::new(sys.state_dim(), tol);
    diag.sufficiency_only = true;
    let (mut v, failed) = outcome_verdict(Method::Theorem2, outcome, diag);
    if failed {
        if is_nonsingular(&sys.phi, tol)? {
            v.status = Status::Uncontrollable;
            v.diagnostics
                .notes
                .push("state matrix is nonsingular; the violation is necessary".into());
        } else {
            v.diagnostics
                .notes
                .push("state matrix is singular; the violation alone does not decide".into());
        }
    }
    Ok(v)
}

fn topology_pair(net: &MultilayerNetwork, which: Method) -> Result<(CMat, CMat)> {
    let l1 = net.layer(1);
    match which {
        Method::Corollary2 => Ok((from_real(&l1.w), from_real(&l1.delta_matrix()))),
        _ => {
            let l2 = net.layer(2);
            let n = net.nodes();
            let d = from_real(&net.coupling(2, 1).expect("drive-response").d);
            let mut w = block_diag(&[from_real(&l1.w), from_real(&l2.w)]);
            w.view_mut((n, 0), (n, n)).copy_from(&d);
            let delta = block_diag(&[from_real(&l1.delta_matrix()), from_real(&l2.delta_matrix())]);
            Ok((w, delta))
        }
    }
}

/// Topology screens: the drive layer `(W¹, Δ¹)` (`Corollary2`) or the
/// aggregate `(W̄, Δ̄)` of a homogeneous network (`Corollary3`). Necessary
/// conditions only, and only when `Φ_s` is nonsingular.
pub fn topology_necessity_test(
    net: &MultilayerNetwork,
    h: f64,
    which: Method,
    tol: &Tolerances,
) -> Result<Verdict> {
    let tag = require_drive_response(net, tol)?;
    if !matches!(which, Method::Corollary2 | Method::Corollary3) {
        return Err(Error::Argument(format!(
            "'{which}' is not a topology screen"
        )));
    }
    if which == Method::Corollary3 && tag != StructureTag::HomogeneousDriveResponse {
        return Err(Error::Structure(
            "the aggregate topology screen requires a homogeneous network".into(),
        ));
    }
    let sys = build_sampled(net, h)?;
    let mut diag = Diagnostics::new(sys.state_dim(), tol);
    let (w, delta) = topology_pair(net, which)?;
    let topo = pbh_pair(&w, &delta, tol)?;
    diag.notes.push(format!(
        "topology pair is {}",
        if topo.witness.is_some() {
            "uncontrollable"
        } else {
            "controllable"
        }
    ));
    if !is_nonsingular(&sys.phi, tol)? {
        diag.notes
            .push("state matrix is singular; the screen does not apply".into());
        return Ok(Verdict {
            status: Status::Inconclusive,
            method: which,
            witness: None,
            diagnostics: diag,
        });
    }
    let Some(tw) = topo.witness else {
        diag.notes
            .push("topology screen passed; it is a necessary condition only".into());
        return Ok(Verdict {
            status: Status::Inconclusive,
            method: which,
            witness: None,
            diagnostics: diag,
        });
    };
    // Lift v (vΔ = 0, vW = λv) to η = v ⊗ ξ with ξ a left eigenvector of
    // E = e^{Ah} + λℋ.
    let b = &sys.layer_blocks[0];
    let e = &b.exp_ah + &b.hcal * tw.eigenvalue;
    let theta = clustered_spectrum(&e, tol)?[0].value;
    let xi: RowVec = eigen_left_nullspace(&shifted(theta, &e), tol.rank)?
        .row(0)
        .into_owned();
    let eta = kron_row(&tw.vector, &xi);
    let eta = pad(&eta, 0, sys.state_dim() - eta.len());
    let w = make_witness(&sys.phi, &sys.psi, theta, eta, "uncontrollable topology");
    Ok(Verdict {
        status: Status::Uncontrollable,
        method: which,
        witness: Some(w),
        diagnostics: diag,
    })
}

/// Homogeneous drive-response decomposition on the closed-form eigenbasis.
pub fn homogeneous_test(net: &MultilayerNetwork, h: f64, tol: &Tolerances) -> Result<Verdict> {
    let spec = homogeneous_eigenspace(net, h, tol)?;
    let sys = build_sampled(net, h)?;
    let mut diag = Diagnostics::new(sys.state_dim(), tol);
    diag.sufficiency_only = true;
    let scale = sys.phi.norm().max(sys.psi.norm()).max(1.0);
    let mut failures = Vec::new();
    let mut complete = true;
    for e in &spec.entries {
        if !e.complete {
            complete = false;
            diag.notes.push(format!(
                "eigenbasis at {} spans {} of {} dimensions",
                e.theta,
                e.basis.nrows(),
                e.direct_dim
            ));
        }
        let prod = &e.basis * &sys.psi;
        let null = left_nullspace(
            &prod,
            reduced_threshold(tol, prod.nrows(), prod.ncols(), scale),
        )?;
        if null.nrows() > 0 {
            let eta = null.row(0) * &e.basis;
            failures.push(make_witness(
                &sys.phi,
                &sys.psi,
                e.theta,
                eta,
                "input annihilation",
            ));
        }
    }
    let failed = !failures.is_empty();
    let witness = first_failure(failures);
    let mut status = if failed || !complete {
        Status::Inconclusive
    } else {
        Status::Controllable
    };
    if failed {
        if is_nonsingular(&sys.phi, tol)? {
            let dr = drive_response_test(net, h, tol)?;
            if dr.status == Status::Uncontrollable {
                status = Status::Uncontrollable;
                diag.notes.push("violation confirmed through the drive-response decomposition (nonsingular state matrix)".into());
            } else {
                diag.notes.push(format!(
                    "drive-response decomposition returned {}",
                    dr.status
                ));
            }
        } else {
            diag.notes
                .push("state matrix is singular; the violation alone does not decide".into());
        }
    }
    Ok(Verdict {
        status,
        method: Method::Theorem3,
        witness,
        diagnostics: diag,
    })
}

/// Map eigenspaces of `Φ` to eigenspaces of `Φ^l` (θ ↦ θ^l), merging
/// pre-images that collide.
fn powered_spaces(
    entries: &[EigenspaceEntry],
    block: &CMat,
    l: usize,
    tol: &Tolerances,
) -> Result<Vec<EigenspaceEntry>> {
    let powered: Vec<(C64, usize)> = entries
        .iter()
        .map(|e| (e.theta.powi(l as i32), e.multiplicity))
        .collect();
    let rho = powered.iter().map(|(v, _)| v.norm()).fold(0.0, f64::max);
    let clusters = cluster_values(&powered, tol.eig_abs(rho));
    clusters
        .iter()
        .map(|c| {
            let vectors = entries
                .iter()
                .zip(&powered)
                .filter(|(_, (v, _))| {
                    clusters
                        .iter()
                        .map(|o| (o.value - v).norm())
                        .fold(f64::INFINITY, f64::min)
                        == (c.value - v).norm()
                })
                .flat_map(|(e, _)| e.vectors.iter().cloned())
                .collect();
            eigenspace_entry(block, c.value, c.multiplicity, vectors, tol)
        })
        .collect()
}

/// Multi-rate decomposition on the lifted pair. A violation is upgraded to
/// `Uncontrollable` only when the Kalman test on the lifted pair confirms.
pub fn multirate_test(
    net: &MultilayerNetwork,
    h: f64,
    l: usize,
    pattern: Pattern,
    tol: &Tolerances,
) -> Result<Verdict> {
    let method = match pattern {
        Pattern::SingleRate => return drive_response_test(net, h, tol),
        Pattern::SlowInterLayer => Method::Corollary4,
        Pattern::MultiScale => Method::Corollary5,
        Pattern::FastControl => Method::Corollary6,
    };
    require_drive_response(net, tol)?;
    if l == 1 {
        let mut v = drive_response_test(net, h, tol)?;
        v.method = method;
        v.diagnostics
            .notes
            .push("l = 1: identical to the single-rate decomposition".into());
        return Ok(v);
    }
    let lifted = lift_multirate(net, h, l, pattern)?;
    let lh = l as f64 * h;
    let n1 = lifted.index.state_range(1).len();
    let m1 = lifted.index.input_range(1).len();
    let (l1, l2) = (net.layer(1), net.layer(2));
    let block11 = lifted.phi_block(1, 1);
    let block22 = lifted.phi_block(2, 2);
    let spaces1 = match pattern {
        Pattern::SlowInterLayer => {
            powered_spaces(&layer_eigenspaces(l1, h, tol)?, &block11, l, tol)?
        }
        _ => layer_eigenspaces(l1, lh, tol)?,
    };
    let spaces2 = match pattern {
        Pattern::FastControl => layer_eigenspaces(l2, lh, tol)?,
        _ => powered_spaces(&layer_eigenspaces(l2, h, tol)?, &block22, l, tol)?,
    };
    let outcome = two_layer_conditions(&lifted.phi, &lifted.psi, n1, m1, &spaces1, &spaces2, tol)?;
    let mut diag = Diagnostics::new(lifted.state_dim(), tol);
    diag.sufficiency_only = true;
    let (mut v, failed) = outcome_verdict(method, outcome, diag);
    if failed {
        let k = kalman_pair(&lifted.phi, &lifted.psi, tol)?;
        v.diagnostics.reach_rank = k.diagnostics.reach_rank;
        if k.status == Status::Uncontrollable {
            v.status = Status::Uncontrollable;
            v.diagnostics
                .notes
                .push("violation confirmed by the Kalman test on the lifted pair".into());
        } else {
            v.diagnostics
                .notes
                .push("Kalman test on the lifted pair does not confirm the violation".into());
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::parse_network_spec;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ex(k: usize) -> MultilayerNetwork {
        let text = match k {
            1 => include_str!("../../fixtures/example1.json"),
            2 => include_str!("../../fixtures/example2.json"),
            3 => include_str!("../../fixtures/example3.json"),
            _ => include_str!("../../fixtures/example4.json"),
        };
        parse_network_spec(text).unwrap()
    }

    #[test]
    fn example_one_controllable_despite_response_layer() {
        let v = drive_response_test(&ex(1), 0.1, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Controllable);
        let failed: Vec<_> = v
            .diagnostics
            .layer_checks
            .iter()
            .filter(|c| c.layer == 2 && !c.passed)
            .collect();
        assert_eq!(failed.len(), 1);
        let eta = failed[0].witness.as_ref().unwrap();
        let expect = [1.0, 0.0, 0.0, 0.0];
        for (a, b) in eta.iter().zip(expect) {
            assert!((a - C64::new(b, 0.0)).norm() < 1e-9, "{eta}");
        }
    }

    #[test]
    fn example_two_homogeneous_controllable_despite_nodes() {
        let t = Tolerances::default();
        let v = homogeneous_test(&ex(2), PI, &t).unwrap();
        assert_eq!(v.status, Status::Controllable);
        assert!(v.witness.is_none());
        let c3 = topology_necessity_test(&ex(2), PI, Method::Corollary3, &t).unwrap();
        assert_eq!(c3.status, Status::Inconclusive);
    }

    #[test]
    fn example_four_single_rate() {
        let t = Tolerances::default();
        let v = drive_response_test(&ex(4), PI, &t).unwrap();
        assert_eq!(v.status, Status::Uncontrollable);
        assert!(v.witness.unwrap().residual < 1e-10);
        let v = drive_response_test(&ex(4), FRAC_PI_2, &t).unwrap();
        assert_eq!(v.status, Status::Controllable);
    }

    #[test]
    fn example_three_slow_inter_layer() {
        let t = Tolerances::default();
        let v = multirate_test(&ex(3), FRAC_PI_2, 2, Pattern::SlowInterLayer, &t).unwrap();
        assert_eq!(v.status, Status::Uncontrollable);
        assert_eq!(v.diagnostics.reach_rank, Some(6));
        let v1 = multirate_test(&ex(3), FRAC_PI_2, 1, Pattern::SlowInterLayer, &t).unwrap();
        assert_eq!(
            v1.status,
            drive_response_test(&ex(3), FRAC_PI_2, &t).unwrap().status
        );
    }

    #[test]
    fn example_four_fast_control() {
        let v = multirate_test(
            &ex(4),
            FRAC_PI_2,
            2,
            Pattern::FastControl,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(v.status, Status::Controllable);
    }

    #[test]
    fn drive_layer_topology_screen() {
        // A drive layer with no controlled node fails (W¹, Δ¹).
        let text = include_str!("../../fixtures/example1.json")
            .replace("\"delta\": [1, 0]", "\"delta\": [0, 0]");
        let net = parse_network_spec(&text).unwrap();
        let v =
            topology_necessity_test(&net, 0.1, Method::Corollary2, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Uncontrollable);
        assert!(v.witness.unwrap().residual < 1e-10);
    }
}
