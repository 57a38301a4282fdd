//! Seeded random fixtures shared by the integration tests.
#![allow(dead_code)]

use netsamp::netmodel::{parse_network_spec, MultilayerNetwork};
use netsamp::{CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> MultilayerNetwork {
    parse_network_spec(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

/// Shape and entry style of a random two-layer drive-response network.
#[derive(Debug, Clone, Copy)]
pub struct NetShape {
    pub max_nodes: usize,
    pub max_n: usize,
    pub homogeneous: bool,
    /// Small integers (which produce repeated and defective spectra) instead
    /// of three-decimal reals.
    pub integer: bool,
}

fn entry(rng: &mut ChaCha8Rng, integer: bool) -> String {
    if integer {
        format!("{}", rng.gen_range(-2i32..=2))
    } else {
        format!("{:.3}", rng.gen_range(-1.5..1.5))
    }
}

fn json_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, integer: bool) -> String {
    let rows: Vec<String> = (0..r)
        .map(|_| {
            let v: Vec<String> = (0..c).map(|_| entry(rng, integer)).collect();
            format!("[{}]", v.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Binary matrix; with `hollow` the diagonal is zero.
fn binary_matrix(rng: &mut ChaCha8Rng, n: usize, hollow: bool) -> String {
    let rows: Vec<String> = (0..n)
        .map(|i| {
            let v: Vec<String> = (0..n)
                .map(|j| {
                    if hollow && i == j {
                        "0".into()
                    } else {
                        format!("{}", rng.gen_range(0..=1))
                    }
                })
                .collect();
            format!("[{}]", v.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Random two-layer drive-response network (layer 1 drives layer 2).
pub fn drive_response(rng: &mut ChaCha8Rng, shape: NetShape) -> MultilayerNetwork {
    let nodes = rng.gen_range(2..=shape.max_nodes);
    let n = rng.gen_range(1..=shape.max_n);
    let p = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=n);
    let int = shape.integer;
    let shared = (
        json_matrix(rng, n, n, int),
        json_matrix(rng, n, p, int),
        json_matrix(rng, m, n, int),
        json_matrix(rng, n, m, int),
    );
    let mut layers = Vec::new();
    for _ in 0..2 {
        let (a, b, c, h) = if shape.homogeneous {
            shared.clone()
        } else {
            (
                json_matrix(rng, n, n, int),
                json_matrix(rng, n, p, int),
                json_matrix(rng, m, n, int),
                json_matrix(rng, n, m, int),
            )
        };
        let delta: Vec<String> = (0..nodes)
            .map(|_| format!("{}", rng.gen_range(0..=1)))
            .collect();
        layers.push(format!(
            r#"{{"A":{a},"B":{b},"C":{c},"H":{h},"W":{},"delta":[{}]}}"#,
            binary_matrix(rng, nodes, true),
            delta.join(",")
        ));
    }
    let d = binary_matrix(rng, nodes, false);
    let pm = if shape.homogeneous {
        shared.3.clone()
    } else {
        json_matrix(rng, n, m, int)
    };
    let text = format!(
        r#"{{"layers":[{},{}],"couplings":[{{"to":2,"from":1,"D":{d},"P":{pm}}}]}}"#,
        layers[0], layers[1]
    );
    parse_network_spec(&text).unwrap()
}

/// Alternating real/integer, heterogeneous/homogeneous networks.
pub fn mixed_ensemble(seed: u64, count: usize) -> Vec<(MultilayerNetwork, f64)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let shape = NetShape {
                max_nodes: 4,
                max_n: 3,
                homogeneous: i % 3 == 0,
                integer: i % 2 == 1,
            };
            let net = drive_response(&mut rng, shape);
            (net, rng.gen_range(0.1..2.0))
        })
        .collect()
}

pub fn random_real(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0))
}

/// Random `n×n` real matrix whose last row is a combination of the others
/// (zero when `n = 1`).
pub fn random_singular(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let mut m = random_real(rng, n, n);
    let coeffs: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for j in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            s += m[(i, j)] * *c;
        }
        m[(n - 1, j)] = s;
    }
    m
}
