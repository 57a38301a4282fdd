//! Network data model, spec-file parsing and structure classification.
//!
//! A spec file is JSON:
//!
//! ```json
//! { "layers": [ { "A": [[..]], "B": [[..]], "C": [[..]], "H": [[..]],
//!                 "W": [[..]], "delta": [0, 1, ..] }, ... ],
//!   "couplings": [ { "to": 2, "from": 1, "D": [[..]], "P": [[..]] } ] }
//! ```
//!
//! Layer ids are 1-based positions in `layers`. Matrices are row-major.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{clustered_spectrum, from_real, Tolerances};

/// One layer: identical node systems `(A, B, C)`, inner coupling `H`,
/// topology `W` and the input-selection diagonal `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    /// 1-based layer id.
    pub index: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub delta: Vec<u8>,
}

impl LayerSpec {
    /// Node count `N`.
    pub fn nodes(&self) -> usize {
        self.w.nrows()
    }
    /// State dimension `n`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension `p`.
    pub fn p(&self) -> usize {
        self.b.ncols()
    }
    /// Output dimension `m`.
    pub fn m(&self) -> usize {
        self.c.nrows()
    }
    /// `Δ` as a diagonal matrix.
    pub fn delta_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.delta.len(),
            self.delta.iter().map(|&d| d as f64),
        ))
    }
}

/// Directed coupling from layer `from` (L) into layer `to` (K).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub to: usize,
    pub from: usize,
    pub d: DMatrix<f64>,
    pub p: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilayerNetwork {
    pub layers: Vec<LayerSpec>,
    pub couplings: Vec<CouplingSpec>,
}

/// Inter-layer structure, most specific first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureTag {
    General,
    TwoLayerDriveResponse,
    HomogeneousDriveResponse,
    DeepChain,
    DeepStar,
}

impl StructureTag {
    pub fn name(self) -> &'static str {
        match self {
            StructureTag::General => "general",
            StructureTag::TwoLayerDriveResponse => "two-layer drive-response",
            StructureTag::HomogeneousDriveResponse => "homogeneous drive-response",
            StructureTag::DeepChain => "deep chain",
            StructureTag::DeepStar => "deep star",
        }
    }

    /// True for both drive-response shapes.
    pub fn is_drive_response(self) -> bool {
        matches!(
            self,
            StructureTag::TwoLayerDriveResponse | StructureTag::HomogeneousDriveResponse
        )
    }
}

impl std::fmt::Display for StructureTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    layers: Vec<RawLayer>,
    #[serde(default)]
    couplings: Vec<RawCoupling>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    delta: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    to: usize,
    from: usize,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
}

fn to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::Dimension {
            matrix: name.into(),
            detail: "matrix is empty".into(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::Dimension {
                matrix: name.into(),
                detail: format!("row {} has {} entries, row 1 has {c}", i + 1, row.len()),
            });
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::Invalid(format!(
                "{name} entry ({}, {}) is not finite",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Parse and validate a spec file.
pub fn parse_network_spec(text: &str) -> Result<MultilayerNetwork> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut layers = Vec::with_capacity(raw.layers.len());
    for (k, l) in raw.layers.iter().enumerate() {
        let id = k + 1;
        let mut delta = Vec::with_capacity(l.delta.len());
        for (i, &d) in l.delta.iter().enumerate() {
            if d == 0.0 {
                delta.push(0);
            } else if d == 1.0 {
                delta.push(1);
            } else {
                return Err(Error::Invalid(format!(
                    "delta^{id} entry {} is {d}; entries must be 0 or 1",
                    i + 1
                )));
            }
        }
        layers.push(LayerSpec {
            index: id,
            a: to_matrix(&format!("A^{id}"), &l.a)?,
            b: to_matrix(&format!("B^{id}"), &l.b)?,
            c: to_matrix(&format!("C^{id}"), &l.c)?,
            h: to_matrix(&format!("H^{id}"), &l.h)?,
            w: to_matrix(&format!("W^{id}"), &l.w)?,
            delta,
        });
    }
    let mut couplings = Vec::with_capacity(raw.couplings.len());
    for c in &raw.couplings {
        let tag = format!("{},{}", c.to, c.from);
        couplings.push(CouplingSpec {
            to: c.to,
            from: c.from,
            d: to_matrix(&format!("D^{{{tag}}}"), &c.d)?,
            p: to_matrix(&format!("P^{{{tag}}}"), &c.p)?,
        });
    }
    MultilayerNetwork::new(layers, couplings)
}

impl MultilayerNetwork {
    /// Validate and build. Layer `index` fields are reassigned from position.
    pub fn new(mut layers: Vec<LayerSpec>, couplings: Vec<CouplingSpec>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::Invalid(format!(
                "M ≥ 2 required (found {} layer{})",
                layers.len(),
                if layers.len() == 1 { "" } else { "s" }
            )));
        }
        for (k, l) in layers.iter_mut().enumerate() {
            l.index = k + 1;
        }
        let nodes = layers[0].w.nrows();
        for l in &layers {
            validate_layer(l, nodes)?;
        }
        let m = layers.len();
        let mut seen = std::collections::BTreeSet::new();
        for c in &couplings {
            let tag = format!("D^{{{},{}}}", c.to, c.from);
            if c.to == 0 || c.to > m || c.from == 0 || c.from > m {
                return Err(Error::Invalid(format!(
                    "coupling ({}, {}) refers to a layer outside 1..={m}",
                    c.to, c.from
                )));
            }
            if c.to == c.from {
                return Err(Error::Invalid(format!(
                    "coupling ({}, {}) must connect two different layers",
                    c.to, c.from
                )));
            }
            if !seen.insert((c.to, c.from)) {
                return Err(Error::Invalid(format!(
                    "duplicate coupling ({}, {})",
                    c.to, c.from
                )));
            }
            if c.d.shape() != (nodes, nodes) {
                return Err(Error::Dimension {
                    matrix: tag,
                    detail: format!(
                        "expected {nodes}x{nodes}, got {}x{}",
                        c.d.nrows(),
                        c.d.ncols()
                    ),
                });
            }
            let (tgt, src) = (&layers[c.to - 1], &layers[c.from - 1]);
            if c.p.shape() != (tgt.n(), src.m()) {
                return Err(Error::Dimension {
                    matrix: format!("P^{{{},{}}}", c.to, c.from),
                    detail: format!(
                        "expected {}x{} (target n x source m), got {}x{}",
                        tgt.n(),
                        src.m(),
                        c.p.nrows(),
                        c.p.ncols()
                    ),
                });
            }
        }
        Ok(MultilayerNetwork { layers, couplings })
    }

    /// Layer count `M`.
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Node count `N` (shared by all layers).
    pub fn nodes(&self) -> usize {
        self.layers[0].nodes()
    }

    /// 1-based layer lookup.
    pub fn layer(&self, k: usize) -> &LayerSpec {
        &self.layers[k - 1]
    }

    pub fn coupling(&self, to: usize, from: usize) -> Option<&CouplingSpec> {
        self.couplings.iter().find(|c| c.to == to && c.from == from)
    }

    /// Total state dimension `Σ_K N n_K`.
    pub fn state_dim(&self) -> usize {
        self.layers.iter().map(|l| l.nodes() * l.n()).sum()
    }

    /// Total input dimension `Σ_K N p_K`.
    pub fn input_dim(&self) -> usize {
        self.layers.iter().map(|l| l.nodes() * l.p()).sum()
    }

    /// Serialize back to the spec-file format (pretty-printed JSON).
    pub fn to_json(&self) -> String {
        let raw = RawNetwork {
            layers: self
                .layers
                .iter()
                .map(|l| RawLayer {
                    a: from_matrix(&l.a),
                    b: from_matrix(&l.b),
                    c: from_matrix(&l.c),
                    h: from_matrix(&l.h),
                    w: from_matrix(&l.w),
                    delta: l.delta.iter().map(|&d| d as f64).collect(),
                })
                .collect(),
            couplings: self
                .couplings
                .iter()
                .map(|c| RawCoupling {
                    to: c.to,
                    from: c.from,
                    d: from_matrix(&c.d),
                    p: from_matrix(&c.p),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("network serializes")
    }
}

fn validate_layer(l: &LayerSpec, nodes: usize) -> Result<()> {
    let k = l.index;
    let dim = |name: &str, m: &DMatrix<f64>, r: usize, c: usize| -> Result<()> {
        if m.shape() != (r, c) {
            return Err(Error::Dimension {
                matrix: format!("{name}^{k}"),
                detail: format!("expected {r}x{c}, got {}x{}", m.nrows(), m.ncols()),
            });
        }
        Ok(())
    };
    let n = l.a.nrows();
    dim("A", &l.a, n, n)?;
    dim("B", &l.b, n, l.b.ncols())?;
    dim("C", &l.c, l.c.nrows(), n)?;
    dim("H", &l.h, n, l.c.nrows())?;
    dim("W", &l.w, nodes, nodes)?;
    if nodes < 2 {
        return Err(Error::Invalid(format!("N ≥ 2 required (found {nodes})")));
    }
    if l.delta.len() != nodes {
        return Err(Error::Dimension {
            matrix: format!("delta^{k}"),
            detail: format!("expected {nodes} entries, got {}", l.delta.len()),
        });
    }
    if let Some(i) = (0..nodes).find(|&i| l.w[(i, i)] != 0.0) {
        return Err(Error::Invalid(format!(
            "W^{k} has nonzero diagonal entry w_{{{0}{0}}} = {1}; the diagonal must be zero",
            i + 1,
            l.w[(i, i)]
        )));
    }
    if l.delta.iter().any(|&d| d > 1) {
        return Err(Error::Invalid(format!("delta^{k} entries must be 0 or 1")));
    }
    Ok(())
}

/// Most specific structure tag for the network. `tol_eig` is the relative
/// eigenvalue merge tolerance used to decide spectral disjointness.
pub fn classify_structure(net: &MultilayerNetwork, tol_eig: f64) -> StructureTag {
    let m = net.layer_count();
    let mut pairs: Vec<(usize, usize)> = net.couplings.iter().map(|c| (c.to, c.from)).collect();
    pairs.sort_unstable();
    if m == 2 && pairs == [(2, 1)] {
        if is_homogeneous(net, tol_eig) {
            return StructureTag::HomogeneousDriveResponse;
        }
        return StructureTag::TwoLayerDriveResponse;
    }
    if m >= 3 {
        let chain: Vec<(usize, usize)> = (1..m).map(|k| (k + 1, k)).collect();
        if pairs == chain {
            return StructureTag::DeepChain;
        }
        let star: Vec<(usize, usize)> = (2..=m).map(|k| (k, 1)).collect();
        if pairs == star {
            return StructureTag::DeepStar;
        }
    }
    StructureTag::General
}

fn is_homogeneous(net: &MultilayerNetwork, tol_eig: f64) -> bool {
    let (l1, l2) = (net.layer(1), net.layer(2));
    let p = match net.coupling(2, 1) {
        Some(c) => &c.p,
        None => return false,
    };
    if l1.a != l2.a || l1.b != l2.b || l1.c != l2.c || l1.h != l2.h || &l1.h != p {
        return false;
    }
    let tol = Tolerances {
        eig: tol_eig,
        ..Tolerances::default()
    };
    let (s1, s2) = match (
        clustered_spectrum(&from_real(&l1.w), &tol),
        clustered_spectrum(&from_real(&l2.w), &tol),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return false,
    };
    let rho = s1
        .iter()
        .chain(s2.iter())
        .map(|c| c.value.norm())
        .fold(0.0, f64::max);
    let sep = tol.eig_abs(rho);
    s1.iter()
        .all(|a| s2.iter().all(|b| (a.value - b.value).norm() > sep))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = include_str!("../fixtures/example1.json");
    const EX2: &str = include_str!("../fixtures/example2.json");

    #[test]
    fn example_one_parses() {
        let net = parse_network_spec(EX1).unwrap();
        assert_eq!(net.layer_count(), 2);
        assert_eq!(net.nodes(), 2);
        assert_eq!(net.layer(1).n(), 2);
        assert_eq!(
            classify_structure(&net, 1e-8),
            StructureTag::TwoLayerDriveResponse
        );
    }

    #[test]
    fn example_two_is_homogeneous() {
        let net = parse_network_spec(EX2).unwrap();
        assert_eq!(
            classify_structure(&net, 1e-8),
            StructureTag::HomogeneousDriveResponse
        );
    }

    #[test]
    fn round_trip_json() {
        let net = parse_network_spec(EX1).unwrap();
        let again = parse_network_spec(&net.to_json()).unwrap();
        assert_eq!(net, again);
    }

    fn small_layer() -> serde_json::Value {
        serde_json::json!({"A": [[1.0]], "B": [[1.0]], "C": [[1.0]], "H": [[1.0]],
                           "W": [[0.0, 1.0], [0.0, 0.0]], "delta": [1, 0]})
    }

    #[test]
    fn single_layer_rejected() {
        let text = serde_json::json!({"layers": [small_layer()]}).to_string();
        let err = parse_network_spec(&text).unwrap_err();
        assert!(err.to_string().contains("M ≥ 2"), "{err}");
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let mut bad = small_layer();
        bad["W"] = serde_json::json!([[1.0, 1.0], [0.0, 0.0]]);
        let text = serde_json::json!({"layers": [small_layer(), bad]}).to_string();
        let err = parse_network_spec(&text).unwrap_err();
        assert!(err.to_string().contains("diagonal"), "{err}");
    }

    #[test]
    fn delta_must_be_binary() {
        let mut bad = small_layer();
        bad["delta"] = serde_json::json!([2, 0]);
        let text = serde_json::json!({"layers": [small_layer(), bad]}).to_string();
        assert!(matches!(parse_network_spec(&text), Err(Error::Invalid(_))));
    }

    #[test]
    fn dimension_error_names_matrix() {
        let mut bad = small_layer();
        bad["H"] = serde_json::json!([[1.0, 2.0]]);
        let text = serde_json::json!({"layers": [small_layer(), bad]}).to_string();
        match parse_network_spec(&text) {
            Err(Error::Dimension { matrix, .. }) => assert_eq!(matrix, "H^2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_coupling_rejected() {
        let c =
            serde_json::json!({"to": 2, "from": 1, "D": [[1.0, 0.0], [0.0, 0.0]], "P": [[1.0]]});
        let text = serde_json::json!({"layers": [small_layer(), small_layer()], "couplings": [c.clone(), c]})
            .to_string();
        let err = parse_network_spec(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_network_spec("{\"layers\": [\n  {\"A\": [[1,]]}") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deep_structures() {
        let c = |to: usize, from: usize| serde_json::json!({"to": to, "from": from, "D": [[1.0, 0.0], [0.0, 0.0]], "P": [[1.0]]});
        let layers = vec![small_layer(), small_layer(), small_layer()];
        let star = serde_json::json!({"layers": layers, "couplings": [c(2, 1), c(3, 1)]});
        let net = parse_network_spec(&star.to_string()).unwrap();
        assert_eq!(classify_structure(&net, 1e-8), StructureTag::DeepStar);
        let chain = serde_json::json!({"layers": layers, "couplings": [c(2, 1), c(3, 2)]});
        let net = parse_network_spec(&chain.to_string()).unwrap();
        assert_eq!(classify_structure(&net, 1e-8), StructureTag::DeepChain);
        let general = serde_json::json!({"layers": layers, "couplings": [c(1, 2), c(3, 2)]});
        let net = parse_network_spec(&general.to_string()).unwrap();
        assert_eq!(classify_structure(&net, 1e-8), StructureTag::General);
    }
}
