//! Deep chain and deep star structures.

use super::structured::reduced_threshold;
use super::{first_failure, is_nonsingular, make_witness, Diagnostics, Method, Status, Verdict};
use crate::assemble::build_sampled;
use crate::error::{Error, Result};
use crate::matops::{eigen_left_nullspace, left_nullspace, shifted, CMat, Tolerances};
use crate::netmodel::{classify_structure, MultilayerNetwork, StructureTag};
use crate::spectra::{
    coupling_chain_space, coupling_group_space, incompatible_partition, DeepKind,
};

/// Decomposed test for `M ≥ 3` layers coupled as a chain (`K+1` driven by
/// `K`) or a star (every leaf driven by layer 1). Eigenvalues are assigned to
/// classes; each class contributes the vectors spanned by its coupling
/// chains (or groups), which must not annihilate `Ψ_s`.
pub fn deep_test(
    net: &MultilayerNetwork,
    h: f64,
    kind: DeepKind,
    tol: &Tolerances,
) -> Result<Verdict> {
    let (want, method) = match kind {
        DeepKind::Chain => (StructureTag::DeepChain, Method::Theorem4),
        DeepKind::Star => (StructureTag::DeepStar, Method::Theorem5),
    };
    let tag = classify_structure(net, tol.eig);
    if tag != want {
        return Err(Error::Structure(format!(
            "'{}' structure required, network is '{}'",
            want.name(),
            tag.name()
        )));
    }
    let sys = build_sampled(net, h)?;
    let m = net.layer_count();
    let diag_blocks: Vec<CMat> = (1..=m).map(|k| sys.phi_block(k, k)).collect();
    let off: Vec<CMat> = match kind {
        DeepKind::Chain => (1..m).map(|k| sys.phi_block(k + 1, k)).collect(),
        DeepKind::Star => (2..=m).map(|k| sys.phi_block(k, 1)).collect(),
    };
    let partition = incompatible_partition(&diag_blocks, kind, tol)?;
    let scale = sys.phi.norm().max(sys.psi.norm()).max(1.0);
    let mut diag = Diagnostics::new(sys.state_dim(), tol);
    diag.sufficiency_only = true;
    let mut failures = Vec::new();
    let mut complete = true;
    for entry in &partition.entries {
        let space = match kind {
            DeepKind::Chain => {
                coupling_chain_space(&diag_blocks, &off, entry.theta, entry.classes[0], tol)?
            }
            DeepKind::Star => {
                let leaves: Vec<usize> =
                    entry.classes.iter().copied().filter(|&k| k >= 2).collect();
                coupling_group_space(&diag_blocks, &off, entry.theta, &leaves, tol)?
            }
        };
        let basis = &space.homogeneous;
        let direct = eigen_left_nullspace(&shifted(entry.theta, &sys.phi), tol.rank)?.nrows();
        if basis.nrows() < direct {
            complete = false;
            diag.notes.push(format!(
                "class vectors at {} span {} of {} dimensions",
                entry.theta,
                basis.nrows(),
                direct
            ));
        }
        if basis.nrows() == 0 {
            continue;
        }
        let prod = basis * &sys.psi;
        let null = left_nullspace(
            &prod,
            reduced_threshold(tol, prod.nrows(), prod.ncols(), scale),
        )?;
        if null.nrows() > 0 {
            let eta = null.row(0) * basis;
            failures.push(make_witness(
                &sys.phi,
                &sys.psi,
                entry.theta,
                eta,
                format!("class {:?}", entry.classes),
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
            status = Status::Uncontrollable;
        } else {
            diag.notes
                .push("state matrix is singular; the violation alone does not decide".into());
        }
    }
    Ok(Verdict {
        status,
        method,
        witness,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::build_sampled;
    use crate::matops::Tolerances;
    use crate::netmodel::parse_network_spec;
    use crate::verdicts::pbh_test;

    fn layer(a: &str, delta: &str, w: &str) -> String {
        format!(
            r#"{{"A": {a}, "B": [[1],[0]], "C": [[1,0],[0,1]], "H": [[1,0],[0,1]], "W": {w}, "delta": {delta}}}"#
        )
    }

    fn deep(star: bool, deltas: [&str; 3]) -> MultilayerNetwork {
        let l = [
            layer("[[0,1],[-1,0]]", deltas[0], "[[0,1],[1,0]]"),
            layer("[[0,1],[-2,-1]]", deltas[1], "[[0,0],[1,0]]"),
            layer("[[-1,1],[0,-1]]", deltas[2], "[[0,1],[0,0]]"),
        ];
        let c = if star {
            r#"[{"to": 2, "from": 1, "D": [[1,0],[0,0]], "P": [[1,0],[0,1]]},
                {"to": 3, "from": 1, "D": [[0,0],[0,1]], "P": [[1,0],[0,1]]}]"#
        } else {
            r#"[{"to": 2, "from": 1, "D": [[1,0],[0,0]], "P": [[1,0],[0,1]]},
                {"to": 3, "from": 2, "D": [[0,0],[0,1]], "P": [[1,0],[0,1]]}]"#
        };
        parse_network_spec(&format!(
            r#"{{"layers": [{}, {}, {}], "couplings": {c}}}"#,
            l[0], l[1], l[2]
        ))
        .unwrap()
    }

    #[test]
    fn deep_tests_agree_with_pbh_when_decisive() {
        let t = Tolerances::default();
        for star in [false, true] {
            for deltas in [
                ["[1,0]", "[0,0]", "[0,0]"],
                ["[1,1]", "[1,0]", "[0,1]"],
                ["[0,0]", "[0,0]", "[1,0]"],
            ] {
                let net = deep(star, deltas);
                let kind = if star {
                    DeepKind::Star
                } else {
                    DeepKind::Chain
                };
                let v = deep_test(&net, 0.3, kind, &t).unwrap();
                let p = pbh_test(&build_sampled(&net, 0.3).unwrap(), &t).unwrap();
                if v.status != Status::Inconclusive {
                    assert_eq!(v.status, p.status, "star={star} deltas={deltas:?}");
                }
                if let Some(w) = v.witness {
                    assert!(w.residual < 1e-9);
                }
            }
        }
    }

    #[test]
    fn wrong_structure_is_an_error() {
        let net = deep(false, ["[1,0]", "[0,0]", "[0,0]"]);
        assert!(deep_test(&net, 0.3, DeepKind::Star, &Tolerances::default()).is_err());
    }
}
