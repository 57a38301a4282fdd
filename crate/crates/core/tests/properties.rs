mod common;

use common::{drive_response, NetShape};
use netsamp::assemble::{build_sampled, layer_blocks, lift_multirate, Pattern};
use netsamp::matops::{expm, hcat, kron, shifted, zoh_integral, CMat, RowVec, Tolerances, C64};
use netsamp::netmodel::MultilayerNetwork;
use netsamp::verdicts::{analyze, drive_response_test, kalman_test, AnalysisRequest, Status};
use proptest::prelude::*;

fn net_from(seed: u64, integer: bool) -> MultilayerNetwork {
    let mut rng = common::rng(seed);
    drive_response(
        &mut rng,
        NetShape {
            max_nodes: 3,
            max_n: 3,
            homogeneous: seed % 3 == 0,
            integer,
        },
    )
}

fn square(max: usize) -> impl Strategy<Value = CMat> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-2.0f64..2.0, n * n)
            .prop_map(move |v| CMat::from_fn(n, n, |i, j| C64::new(v[i * n + j], 0.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hold_integral_closes_the_exponential(a in square(5), h in 0.01f64..4.0) {
        let n = a.nrows();
        let e = expm(&a, h).unwrap();
        let g = zoh_integral(&a, h).unwrap();
        let defect = (&a * &g + CMat::identity(n, n) - &e).norm();
        prop_assert!(defect <= 1e-9 * e.norm(), "defect {defect:e}");
    }

    #[test]
    fn exponential_is_a_semigroup(a in square(4), h in 0.01f64..1.5) {
        let once = expm(&a, 2.0 * h).unwrap();
        let half = expm(&a, h).unwrap();
        prop_assert!((&half * &half - &once).norm() <= 1e-10 * once.norm().max(1.0));
    }

    #[test]
    fn block_index_round_trips(seed in any::<u64>()) {
        let net = net_from(seed, false);
        let sys = build_sampled(&net, 0.5).unwrap();
        let idx = &sys.index;
        for row in 0..sys.state_dim() {
            let (k, node, comp) = idx.locate(row).unwrap();
            prop_assert_eq!(idx.state_index(k, node, comp), row);
        }
        prop_assert!(idx.locate(sys.state_dim()).is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_ratio_lift_is_the_sampled_pair(seed in any::<u64>(), h in 0.05f64..2.0) {
        let net = net_from(seed, seed % 2 == 0);
        let base = build_sampled(&net, h).unwrap();
        for pattern in [Pattern::SlowInterLayer, Pattern::MultiScale, Pattern::FastControl] {
            let lifted = lift_multirate(&net, h, 1, pattern).unwrap();
            prop_assert_eq!(&lifted.phi, &base.phi);
            prop_assert_eq!(&lifted.psi, &base.psi);
            prop_assert_eq!(lifted.pattern, pattern);
        }
    }

    #[test]
    fn fast_control_input_blocks_telescope(seed in any::<u64>(), h in 0.05f64..1.0, l in 2usize..4) {
        let net = net_from(seed, false);
        let sys = lift_multirate(&net, h, l, Pattern::FastControl).unwrap();
        for k in 1..=2 {
            let layer = net.layer(k);
            let psi = sys.psi_block(k);
            let width = psi.ncols() / l;
            let mut sum = CMat::zeros(psi.nrows(), width);
            for r in 0..l {
                sum += psi.columns(r * width, width);
            }
            let delta = netsamp::matops::from_real(&layer.delta_matrix());
            let whole = kron(&delta, &layer_blocks(layer, l as f64 * h).unwrap().bcal);
            prop_assert!((&sum - &whole).norm() <= 1e-9 * whole.norm().max(1.0));
        }
    }

    #[test]
    fn uncontrollable_witnesses_annihilate_the_pencil(seed in any::<u64>(), h in 0.1f64..2.0) {
        let net = net_from(seed, true);
        let outcome = analyze(&net, &AnalysisRequest::single_rate(h)).unwrap();
        let sys = &outcome.system;
        let scale = sys.phi.norm().max(sys.psi.norm()).max(1.0);
        for v in &outcome.verdicts {
            if let Some(w) = &v.witness {
                if v.status != Status::Uncontrollable {
                    continue;
                }
                let pencil = hcat(&[&shifted(w.eigenvalue, &sys.phi), &sys.psi]);
                let r = (&w.vector * pencil).norm() / (w.vector.norm() * scale);
                prop_assert!(r <= 1e-8, "{} witness residual {r:e}", v.method);
            }
        }
    }

    #[test]
    fn verdicts_ignore_input_scaling(seed in any::<u64>(), h in 0.1f64..2.0, c in 0.01f64..100.0) {
        let net = net_from(seed, seed % 2 == 1);
        let mut scaled = net.clone();
        for layer in scaled.layers.iter_mut() {
            layer.b *= c;
        }
        let t = Tolerances::default();
        let k0 = kalman_test(&build_sampled(&net, h).unwrap(), &t).unwrap();
        let k1 = kalman_test(&build_sampled(&scaled, h).unwrap(), &t).unwrap();
        prop_assert_eq!(k0.diagnostics.reach_rank, k1.diagnostics.reach_rank);
        let d0 = drive_response_test(&net, h, &t).unwrap();
        let d1 = drive_response_test(&scaled, h, &t).unwrap();
        prop_assert_eq!(d0.status, d1.status);
    }
}

#[test]
fn witness_vector_is_a_row_vector() {
    // The witness type doubles as the report payload; keep it one row.
    let net = common::fixture("example4");
    let o = analyze(&net, &AnalysisRequest::single_rate(std::f64::consts::PI)).unwrap();
    let w: &RowVec = &o.primary().witness.as_ref().unwrap().vector;
    assert_eq!(w.len(), o.state_dim());
}
