//! Cross-method consistency over a larger seeded ensemble than the acceptance
//! suite: Kalman and PBH agree, decomposed verdicts never contradict them,
//! and every layer eigenspace built from chains is complete.

mod common;

use netsamp::assemble::build_sampled;
use netsamp::netmodel::{classify_structure, StructureTag};
use netsamp::spectra::layer_eigenspaces;
use netsamp::verdicts::{
    drive_response_test, homogeneous_test, is_nonsingular, kalman_test, pbh_test, Status,
};
use netsamp::Tolerances;

#[test]
fn kalman_pbh_and_decomposed_tests_agree() {
    let t = Tolerances::default();
    let mut problems = Vec::new();
    for (i, (net, h)) in common::mixed_ensemble(7, 300).into_iter().enumerate() {
        let sys = build_sampled(&net, h).unwrap();
        let k = kalman_test(&sys, &t).unwrap();
        let p = pbh_test(&sys, &t).unwrap();
        if k.status != p.status {
            problems.push(format!("{i}: kalman {} vs pbh {}", k.status, p.status));
        }
        let v = if classify_structure(&net, t.eig) == StructureTag::HomogeneousDriveResponse {
            homogeneous_test(&net, h, &t)
        } else {
            drive_response_test(&net, h, &t)
        };
        let v = match v {
            Ok(v) => v,
            Err(e) => {
                problems.push(format!("{i}: {e}"));
                continue;
            }
        };
        if v.status == Status::Controllable && k.status != Status::Controllable {
            problems.push(format!("{i}: {} Controllable, Kalman not", v.method));
        }
        if is_nonsingular(&sys.phi, &t).unwrap() && v.status != p.status {
            problems.push(format!(
                "{i}: {} {} vs pbh {}",
                v.method, v.status, p.status
            ));
        }
        for l in 1..=2 {
            for e in layer_eigenspaces(net.layer(l), h, &t).unwrap() {
                if !e.complete || e.max_residual > 1e-8 {
                    problems.push(format!(
                        "{i}: layer {l} eigenspace at {} incomplete or inaccurate ({} of {}, residual {:e})",
                        e.theta,
                        e.basis.nrows(),
                        e.direct_dim,
                        e.max_residual
                    ));
                }
            }
        }
    }
    assert!(problems.is_empty(), "{problems:#?}");
}
