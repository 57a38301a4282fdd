//! Block spectra and eigenspace bases built from intra-layer chains.
//!
//! A diagonal block `I_N ⊗ E0 + W ⊗ Hc` has eigenvalues `θ` of
//! `E_i = E0 + λ_i Hc` over the eigenvalues `λ_i` of `W`; left eigenvectors are
//! Kronecker convolutions of left Jordan chains of `W` with generalized
//! chains of `(E_i, Hc)`. Block-triangular multilayer matrices are handled by
//! cascading left-eigenvector equations (coupling chains and groups).

use crate::assemble::{build_sampled, layer_blocks, sampled_diagonal_block};
use crate::error::{Error, Result};
use crate::matops::{
    cluster_values, clustered_spectrum, eigen_left_nullspace, from_real, gauge,
    generalized_chains_at, kron_row, left_jordan_chains, left_nullspace, numerical_rank, row_basis,
    shifted, solve_left, stack_rows, trim_chain, vcat, CMat, Eigencluster, RankTol, RowVec,
    Tolerances, C64,
};
use crate::netmodel::{classify_structure, LayerSpec, MultilayerNetwork, StructureTag};

/// One eigenvalue `θ_{i,j}` of a diagonal block together with its chain data.
#[derive(Debug, Clone)]
pub struct SpectralAtom {
    /// 1-based layer id (0 when the block is not tied to a single layer).
    pub layer: usize,
    /// 1-based index `i` of `λ_i` in the clustered spectrum of `W`.
    pub intra_index: usize,
    /// 1-based index `j` of `θ_{i,j}` in the clustered spectrum of `E_i`.
    pub branch: usize,
    pub lambda: C64,
    pub lambda_multiplicity: usize,
    pub theta: C64,
    /// Algebraic multiplicity of `θ` as an eigenvalue of `E_i`.
    pub theta_multiplicity: usize,
    /// `E_i = E0 + λ_i Hc`.
    pub e_matrix: CMat,
    pub v_chains: Vec<Vec<RowVec>>,
    /// Generalized chains without trailing zero vectors.
    pub xi_chains: Vec<Vec<RowVec>>,
    /// Whether each ξ-chain admits the zero continuation.
    pub xi_extendable: Vec<bool>,
    /// Eigenvectors `η(k) = Σ_{a≤k} v(a) ⊗ ξ(k+1−a)`, `k ≤ β`.
    pub eta: Vec<RowVec>,
    /// `β = min(α, γ)` for each (v-chain, ξ-chain) pair, row-major.
    pub beta: Vec<usize>,
}

impl SpectralAtom {
    /// Multiplicity contributed to the spectrum of the whole block.
    pub fn block_multiplicity(&self) -> usize {
        self.lambda_multiplicity * self.theta_multiplicity
    }
}

/// A merged eigenspace of some block matrix at one clustered eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenspaceEntry {
    pub theta: C64,
    /// Algebraic multiplicity in the matrix described.
    pub multiplicity: usize,
    /// Vectors as produced by the chain constructions.
    pub vectors: Vec<RowVec>,
    /// Orthonormal basis of their span (one vector per row).
    pub basis: CMat,
    /// `dim ker(θI − M)^T` computed directly.
    pub direct_dim: usize,
    /// `basis` spans the full eigenspace.
    pub complete: bool,
    /// Largest relative residual `‖η(θI − M)‖ / (‖η‖ max(1, ‖M‖))`.
    pub max_residual: f64,
}

fn rel_residual(v: &RowVec, m: &CMat, theta: C64) -> f64 {
    let denom = v.norm() * m.norm().max(1.0);
    if denom == 0.0 {
        return 0.0;
    }
    (v * shifted(theta, m)).norm() / denom
}

/// Build an entry for `vectors` claimed to span `M(θ | m)`.
pub fn eigenspace_entry(
    m: &CMat,
    theta: C64,
    multiplicity: usize,
    vectors: Vec<RowVec>,
    tol: &Tolerances,
) -> Result<EigenspaceEntry> {
    let width = m.nrows();
    let stacked = stack_rows(&vectors, width);
    let basis = row_basis(&stacked, RankTol::Auto)?;
    let direct_dim = eigen_left_nullspace(&shifted(theta, m), tol.rank)?.nrows();
    let max_residual = vectors
        .iter()
        .map(|v| rel_residual(v, m, theta))
        .fold(0.0, f64::max);
    Ok(EigenspaceEntry {
        theta,
        multiplicity,
        complete: basis.nrows() >= direct_dim,
        vectors,
        basis,
        direct_dim,
        max_residual,
    })
}

/// Kronecker convolution of one v-chain with one (zero-padded) ξ-chain.
fn convolve(v: &[RowVec], xi: &[RowVec], beta: usize) -> Vec<RowVec> {
    (1..=beta)
        .map(|k| {
            (1..=k)
                .map(|a| kron_row(&v[a - 1], &xi[k - a]))
                .reduce(|x, y| x + y)
                .expect("k ≥ 1")
        })
        .map(|e| gauge(&e))
        .collect()
}

/// Atoms of `I_N ⊗ e0 + w ⊗ hc`, given chains of `w` or a supplied chain
/// table (used for `W̄` in the homogeneous case).
fn atoms_from_chains(
    layer: usize,
    families: Vec<(C64, usize, Vec<Vec<RowVec>>)>,
    e0: &CMat,
    hc: &CMat,
    tol: &Tolerances,
) -> Result<Vec<SpectralAtom>> {
    let mut atoms = Vec::new();
    for (i, (lambda, lmult, v_chains)) in families.into_iter().enumerate() {
        let e = e0 + hc * lambda;
        let alpha = v_chains.iter().map(Vec::len).max().unwrap_or(1);
        for (j, cl) in clustered_spectrum(&e, tol)?.into_iter().enumerate() {
            let raw = generalized_chains_at(&e, hc, cl.value, tol, alpha)?;
            let mut xi_chains = Vec::with_capacity(raw.len());
            let mut xi_extendable = Vec::with_capacity(raw.len());
            for ch in &raw {
                let (t, ext) = trim_chain(ch);
                xi_chains.push(t);
                xi_extendable.push(ext);
            }
            let mut eta = Vec::new();
            let mut beta = Vec::new();
            for v in &v_chains {
                for (xi_raw, (xi, ext)) in raw.iter().zip(xi_chains.iter().zip(&xi_extendable)) {
                    let gamma = if *ext { usize::MAX } else { xi.len() };
                    let b = v.len().min(gamma).min(xi_raw.len());
                    beta.push(b);
                    eta.extend(convolve(v, xi_raw, b));
                }
            }
            atoms.push(SpectralAtom {
                layer,
                intra_index: i + 1,
                branch: j + 1,
                lambda,
                lambda_multiplicity: lmult,
                theta: cl.value,
                theta_multiplicity: cl.multiplicity,
                e_matrix: e.clone(),
                v_chains: v_chains.clone(),
                xi_chains,
                xi_extendable,
                eta,
                beta,
            });
        }
    }
    Ok(atoms)
}

fn w_families(w: &CMat, tol: &Tolerances) -> Result<Vec<(C64, usize, Vec<Vec<RowVec>>)>> {
    Ok(left_jordan_chains(w, tol)?
        .into_iter()
        .map(|f| (f.eigenvalue, f.multiplicity, f.chains))
        .collect())
}

/// Spectral atoms of the sampled diagonal block of one layer.
pub fn decompose_layer_spectrum(
    layer: &LayerSpec,
    h: f64,
    tol: &Tolerances,
) -> Result<Vec<SpectralAtom>> {
    let b = layer_blocks(layer, h)?;
    let w = from_real(&layer.w);
    atoms_from_chains(layer.index, w_families(&w, tol)?, &b.exp_ah, &b.hcal, tol)
}

/// Merge atoms whose eigenvalues cluster together and build one eigenspace
/// entry per cluster, checked against the block `m` the atoms describe.
/// `pad` maps an atom's η (block-local) to the coordinates of `m`.
fn merge_atoms(
    atoms: &[SpectralAtom],
    m: &CMat,
    tol: &Tolerances,
    pad: impl Fn(&SpectralAtom, &RowVec) -> RowVec,
) -> Result<Vec<EigenspaceEntry>> {
    let rho = atoms.iter().map(|a| a.theta.norm()).fold(0.0, f64::max);
    let values: Vec<(C64, usize)> = atoms
        .iter()
        .map(|a| (a.theta, a.block_multiplicity()))
        .collect();
    let clusters = cluster_values(&values, tol.eig_abs(rho));
    let owner: Vec<usize> = atoms.iter().map(|a| nearest(&clusters, a.theta)).collect();
    clusters
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let vectors: Vec<RowVec> = atoms
                .iter()
                .zip(&owner)
                .filter(|(_, &o)| o == ci)
                .flat_map(|(a, _)| a.eta.iter().map(|e| pad(a, e)).collect::<Vec<_>>())
                .collect();
            eigenspace_entry(m, c.value, c.multiplicity, vectors, tol)
        })
        .collect()
}

/// Index of the cluster closest to `theta`.
fn nearest(clusters: &[Eigencluster], theta: C64) -> usize {
    clusters
        .iter()
        .enumerate()
        .min_by(|x, y| {
            (x.1.value - theta)
                .norm()
                .partial_cmp(&(y.1.value - theta).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
        .expect("nonempty cluster list")
}

/// Eigenspaces of one layer's sampled diagonal block (direct sums over all
/// branches sharing a clustered eigenvalue).
pub fn layer_eigenspaces(
    layer: &LayerSpec,
    h: f64,
    tol: &Tolerances,
) -> Result<Vec<EigenspaceEntry>> {
    let atoms = decompose_layer_spectrum(layer, h, tol)?;
    let block = sampled_diagonal_block(layer, &layer_blocks(layer, h)?);
    merge_atoms(&atoms, &block, tol, |_, e| e.clone())
}

/// Basis of `M(θ | Φ^{K,K}_s)` for the eigenvalue of `atom`.
pub fn layer_eigenspace(
    layer: &LayerSpec,
    h: f64,
    atom: &SpectralAtom,
    tol: &Tolerances,
) -> Result<EigenspaceEntry> {
    let entries = layer_eigenspaces(layer, h, tol)?;
    entries
        .into_iter()
        .min_by(|x, y| {
            (x.theta - atom.theta)
                .norm()
                .partial_cmp(&(y.theta - atom.theta).norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::Invalid("empty layer spectrum".into()))
}

/// Chain of `W̄ = [[W¹, 0], [D, W²]]` built from a chain of `W²`.
#[derive(Debug, Clone)]
pub struct HomogeneousChain {
    pub lambda: C64,
    pub v2: Vec<RowVec>,
    pub v21: Vec<RowVec>,
}

#[derive(Debug, Clone)]
pub struct HomogeneousSpectrum {
    pub chains: Vec<HomogeneousChain>,
    pub atoms: Vec<SpectralAtom>,
    pub entries: Vec<EigenspaceEntry>,
}

/// `v^{2,1}(1) = −v²(1) D (W¹ − λI)^{-1}`,
/// `v^{2,1}(k) = (v^{2,1}(k−1) − v²(k) D)(W¹ − λI)^{-1}`.
pub fn v21_chain(
    w1: &CMat,
    d: &CMat,
    lambda: C64,
    v2: &[RowVec],
    tol: &Tolerances,
) -> Result<Vec<RowVec>> {
    let n = w1.nrows();
    let m = w1 - CMat::identity(n, n) * lambda;
    if numerical_rank(&m, tol.rank)? < n {
        return Err(Error::Structure(format!(
            "W^1 - ({lambda})I is numerically singular; spectra of W^1 and W^2 overlap"
        )));
    }
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::Structure("W^1 - λI could not be inverted".into()))?;
    let mut out: Vec<RowVec> = Vec::with_capacity(v2.len());
    for (k, v) in v2.iter().enumerate() {
        let rhs = match k {
            0 => -(v * d),
            _ => &out[k - 1] - v * d,
        };
        out.push(rhs * &inv);
    }
    Ok(out)
}

/// Eigenspaces of the homogeneous two-layer sampled matrix.
pub fn homogeneous_eigenspace(
    net: &MultilayerNetwork,
    h: f64,
    tol: &Tolerances,
) -> Result<HomogeneousSpectrum> {
    if classify_structure(net, tol.eig) != StructureTag::HomogeneousDriveResponse {
        return Err(Error::Structure(
            "homogeneous drive-response structure required".into(),
        ));
    }
    let sys = build_sampled(net, h)?;
    let b = &sys.layer_blocks[0];
    let (l1, l2) = (net.layer(1), net.layer(2));
    let (w1, w2) = (from_real(&l1.w), from_real(&l2.w));
    let d = from_real(&net.coupling(2, 1).expect("drive-response").d);
    let nodes = net.nodes();
    let nn = nodes * l1.n();

    let mut atoms = atoms_from_chains(1, w_families(&w1, tol)?, &b.exp_ah, &b.hcal, tol)?;
    let mut chains = Vec::new();
    let mut families = Vec::new();
    for (lambda, mult, v2s) in w_families(&w2, tol)? {
        let mut bar = Vec::new();
        for v2 in v2s {
            let v21 = v21_chain(&w1, &d, lambda, &v2, tol)?;
            bar.push(
                v21.iter()
                    .zip(&v2)
                    .map(|(a, c)| {
                        RowVec::from_iterator(2 * nodes, a.iter().chain(c.iter()).copied())
                    })
                    .collect(),
            );
            chains.push(HomogeneousChain { lambda, v2, v21 });
        }
        families.push((lambda, mult, bar));
    }
    atoms.extend(atoms_from_chains(2, families, &b.exp_ah, &b.hcal, tol)?);
    let entries = merge_atoms(&atoms, &sys.phi, tol, |a, e| {
        if a.layer == 1 {
            RowVec::from_iterator(
                2 * nn,
                e.iter()
                    .copied()
                    .chain(std::iter::repeat_n(C64::new(0.0, 0.0), nn)),
            )
        } else {
            e.clone()
        }
    })?;
    Ok(HomogeneousSpectrum {
        chains,
        atoms,
        entries,
    })
}

/// Rule used to assign shared eigenvalues to classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeepKind {
    /// Largest member layer.
    Chain,
    /// Leaf layers sharing the eigenvalue (possibly several); the center
    /// only when no leaf contains it.
    Star,
}

#[derive(Debug, Clone)]
pub struct PartitionEntry {
    pub theta: C64,
    /// Total algebraic multiplicity over all diagonal blocks.
    pub multiplicity: usize,
    /// 1-based layers whose block contains `θ`.
    pub members: Vec<usize>,
    /// Assigned class(es).
    pub classes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EigenvaluePartition {
    pub kind: DeepKind,
    pub entries: Vec<PartitionEntry>,
}

impl EigenvaluePartition {
    /// Eigenvalues of class `k`.
    pub fn class(&self, k: usize) -> Vec<C64> {
        self.entries
            .iter()
            .filter(|e| e.classes.contains(&k))
            .map(|e| e.theta)
            .collect()
    }
}

/// Class assignment from diagonal blocks.
pub fn incompatible_partition(
    blocks: &[CMat],
    kind: DeepKind,
    tol: &Tolerances,
) -> Result<EigenvaluePartition> {
    let spectra = blocks
        .iter()
        .map(|b| clustered_spectrum(b, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(incompatible_partition_from_spectra(&spectra, kind, tol))
}

/// Class assignment from precomputed block spectra.
pub fn incompatible_partition_from_spectra(
    spectra: &[Vec<Eigencluster>],
    kind: DeepKind,
    tol: &Tolerances,
) -> EigenvaluePartition {
    let rho = spectra
        .iter()
        .flatten()
        .map(|c| c.value.norm())
        .fold(0.0, f64::max);
    let abs = tol.eig_abs(rho);
    let all: Vec<(C64, usize)> = spectra
        .iter()
        .flatten()
        .map(|c| (c.value, c.multiplicity))
        .collect();
    let merged = cluster_values(&all, abs);
    let entries = merged
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let members: Vec<usize> = spectra
                .iter()
                .enumerate()
                .filter(|(_, s)| s.iter().any(|x| nearest(&merged, x.value) == ci))
                .map(|(k, _)| k + 1)
                .collect();
            let classes = match kind {
                DeepKind::Chain => vec![*members.iter().max().expect("member")],
                DeepKind::Star => {
                    let leaves: Vec<usize> = members.iter().copied().filter(|&k| k >= 2).collect();
                    if leaves.is_empty() {
                        vec![1]
                    } else {
                        leaves
                    }
                }
            };
            PartitionEntry {
                theta: c.value,
                multiplicity: c.multiplicity,
                members,
                classes,
            }
        })
        .collect();
    EigenvaluePartition { kind, entries }
}

/// Solution space `particular + span(homogeneous)`; `particular` is `None`
/// when the defining equations are inconsistent.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    pub theta: C64,
    pub particular: Option<RowVec>,
    /// One basis vector per row.
    pub homogeneous: CMat,
}

/// `Ξ = { ξ : ξ(θI − Φ^{1,1}) = η Φ^{2,1} }`.
pub fn xi_space(
    theta: C64,
    phi11: &CMat,
    phi21: &CMat,
    eta: &RowVec,
    tol: &Tolerances,
) -> Result<SolutionSpace> {
    let a = shifted(theta, phi11);
    let rhs = eta * phi21;
    let sol = solve_left(&a, &rhs, tol.rank)?;
    let scale = phi11.norm().max(phi21.norm()).max(1.0) * eta.norm().max(sol.x.norm()).max(1e-300);
    let particular = (sol.residual <= 1e3 * tol.residual * scale).then_some(sol.x);
    Ok(SolutionSpace {
        theta,
        particular,
        homogeneous: left_nullspace(&a, tol.rank)?,
    })
}

/// Vectors `η = [ξ_1, …, ξ_K, 0, …, 0]` spanned by the coupling chains at
/// `θ` (class `K`). `diag` holds `Φ^{j,j}`, `sub` holds `Φ^{j+1,j}`.
pub fn coupling_chain_space(
    diag: &[CMat],
    sub: &[CMat],
    theta: C64,
    class: usize,
    tol: &Tolerances,
) -> Result<SolutionSpace> {
    let dims: Vec<usize> = diag.iter().map(CMat::nrows).collect();
    let total: usize = dims.iter().sum();
    let k = class;
    let y = eigen_left_nullspace(&shifted(theta, &diag[k - 1]), tol.rank)?;
    // Unknowns: ξ_1 … ξ_{K−1}, c (ξ_K = c Y). Columns: equations for layers 1..K−1.
    let upstream: usize = dims[..k - 1].iter().sum();
    let rows = upstream + y.nrows();
    let mut sys = CMat::zeros(rows, upstream.max(1));
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    for j in 0..k.saturating_sub(1) {
        // Column block j: ξ_j(θI − Φ^{jj}) − ξ_{j+1} Φ^{j+1,j} = 0.
        let a = shifted(theta, &diag[j]);
        sys.view_mut((offsets[j], offsets[j]), a.shape())
            .copy_from(&a);
        if j + 1 < k - 1 {
            let next = -(&sub[j]);
            sys.view_mut((offsets[j + 1], offsets[j]), next.shape())
                .copy_from(&next);
        } else {
            let yp = -(&y * &sub[j]);
            sys.view_mut((upstream, offsets[j]), yp.shape())
                .copy_from(&yp);
        }
    }
    let null = if k == 1 {
        CMat::identity(y.nrows(), y.nrows())
    } else {
        left_nullspace(&sys, tol.rank)?
    };
    let mut out = CMat::zeros(null.nrows(), total);
    for r in 0..null.nrows() {
        let row = null.row(r);
        out.view_mut((r, 0), (1, upstream))
            .copy_from(&row.columns(0, upstream));
        let c = row.columns(upstream, y.nrows()).into_owned();
        let xk = c * &y;
        out.view_mut((r, offsets[k - 1]), (1, dims[k - 1]))
            .copy_from(&xk);
    }
    Ok(SolutionSpace {
        theta,
        particular: None,
        homogeneous: row_basis(&out, RankTol::Auto)?,
    })
}

/// Vectors `η = [ξ_1, …, ξ_{K_q}, …]` spanned by the coupling groups of a
/// star centred in layer 1. `leaves` are the 1-based leaf layers whose block
/// contains `θ`; `spokes[K−2]` holds `Φ^{K,1}`.
pub fn coupling_group_space(
    diag: &[CMat],
    spokes: &[CMat],
    theta: C64,
    leaves: &[usize],
    tol: &Tolerances,
) -> Result<SolutionSpace> {
    let dims: Vec<usize> = diag.iter().map(CMat::nrows).collect();
    let total: usize = dims.iter().sum();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let center = shifted(theta, &diag[0]);
    let mut blocks = vec![center];
    let mut ys = Vec::new();
    for &k in leaves {
        let y = eigen_left_nullspace(&shifted(theta, &diag[k - 1]), tol.rank)?;
        blocks.push(-(&y * &spokes[k - 2]));
        ys.push((k, y));
    }
    let sys = vcat(&blocks.iter().collect::<Vec<_>>());
    let null = left_nullspace(&sys, tol.rank)?;
    let mut out = CMat::zeros(null.nrows(), total);
    for r in 0..null.nrows() {
        let row = null.row(r);
        out.view_mut((r, 0), (1, dims[0]))
            .copy_from(&row.columns(0, dims[0]));
        let mut col = dims[0];
        for (k, y) in &ys {
            let c = row.columns(col, y.nrows()).into_owned();
            col += y.nrows();
            out.view_mut((r, offsets[k - 1]), (1, dims[k - 1]))
                .copy_from(&(c * y));
        }
    }
    Ok(SolutionSpace {
        theta,
        particular: None,
        homogeneous: row_basis(&out, RankTol::Auto)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::real;
    use crate::netmodel::parse_network_spec;

    fn ex(k: usize) -> MultilayerNetwork {
        let text = match k {
            1 => include_str!("../fixtures/example1.json"),
            _ => include_str!("../fixtures/example2.json"),
        };
        parse_network_spec(text).unwrap()
    }

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn unit(v: &[f64]) -> RowVec {
        RowVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn parallel(a: &RowVec, b: &RowVec) -> bool {
        let inner = (a * b.adjoint())[(0, 0)].norm();
        (inner - a.norm() * b.norm()).abs() < 1e-9 * a.norm() * b.norm()
    }

    #[test]
    fn example_one_layer_eigenvectors() {
        let net = ex(1);
        for (k, expected) in [(1, [0., 1., 0., 0.]), (2, [1., 0., 0., 0.])] {
            let atoms = decompose_layer_spectrum(net.layer(k), 0.1, &t()).unwrap();
            assert_eq!(atoms.len(), 1);
            assert!((atoms[0].theta.re - 0.1f64.exp()).abs() < 1e-9);
            assert!(parallel(&atoms[0].eta[0], &unit(&expected)));
            let e = layer_eigenspace(net.layer(k), 0.1, &atoms[0], &t()).unwrap();
            assert!(e.complete);
            assert_eq!(e.multiplicity, 4);
            assert!(e.max_residual < 1e-12);
        }
    }

    #[test]
    fn example_two_layer_one_eigenvalues() {
        let net = ex(2);
        let atoms = decompose_layer_spectrum(net.layer(1), std::f64::consts::PI, &t()).unwrap();
        let mut thetas: Vec<C64> = atoms.iter().map(|a| a.theta).collect();
        thetas.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        let expected = [
            (-35.2110, -12.0703),
            (-35.2110, 12.0703),
            (-11.0703, -12.0703),
            (-11.0703, 12.0703),
        ];
        for (z, (re, im)) in thetas.iter().zip(expected) {
            assert!((z.re - re).abs() < 1e-3 && (z.im - im).abs() < 1e-3, "{z}");
        }
    }

    #[test]
    fn example_two_homogeneous() {
        let net = ex(2);
        let hs = homogeneous_eigenspace(&net, std::f64::consts::PI, &t()).unwrap();
        let mut found = Vec::new();
        for c in &hs.chains {
            let s = c.v2[0][1];
            let v21: Vec<C64> = c.v21[0].iter().map(|z| z / s).collect();
            found.push((c.lambda.re, v21));
        }
        found.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let expect = [[4.0 / 3.0, 2.0 / 3.0], [4.0 / 3.0, -2.0 / 3.0]];
        for ((_, v), e) in found.iter().zip(expect) {
            assert!(
                (v[0].re - e[0]).abs() < 1e-9 && (v[1].re - e[1]).abs() < 1e-9,
                "{v:?}"
            );
        }
        assert_eq!(hs.entries.len(), 8);
        for e in &hs.entries {
            assert!(e.complete && e.max_residual < 1e-9);
        }
    }

    #[test]
    fn decoupled_nodes_repeat_eigenvalues() {
        let mut net = ex(1);
        net.layers[0].w.fill(0.0);
        net.layers[0].a = nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -3.0]);
        let atoms = decompose_layer_spectrum(net.layer(1), 0.5, &t()).unwrap();
        let total: usize = atoms.iter().map(|a| a.block_multiplicity()).sum();
        assert_eq!(total, 4);
        for a in &atoms {
            assert_eq!(a.block_multiplicity(), 2);
        }
    }

    #[test]
    fn xi_space_example_one() {
        let net = ex(1);
        let s = build_sampled(&net, 0.1).unwrap();
        let theta = C64::new(0.1f64.exp(), 0.0);
        let eta = unit(&[1., 0., 0., 0.]);
        let xs = xi_space(theta, &s.phi_block(1, 1), &s.phi_block(2, 1), &eta, &t()).unwrap();
        let p = xs.particular.unwrap();
        assert_eq!(xs.homogeneous.nrows(), 1);
        // ξ = [−0.9511, ξ2, 0, −1]; the printed value was obtained from
        // 4-digit blocks, the exact one is −0.95163.
        assert!((p[0].re + 0.9511).abs() < 1e-3);
        assert!(p[2].norm() < 1e-9);
        assert!((p[3].re + 1.0).abs() < 1e-4);
        let hv = xs.homogeneous.row(0);
        assert!(hv[0].norm() < 1e-9 && hv[2].norm() < 1e-9 && hv[3].norm() < 1e-9);
    }

    #[test]
    fn partition_rules() {
        let d = |v: &[f64]| {
            CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                v.len(),
                v.iter().map(|&x| C64::new(x, 0.0)),
            ))
        };
        let blocks = vec![d(&[1., 2.]), d(&[3., 4.]), d(&[1., 5.])];
        let p = incompatible_partition(&blocks, DeepKind::Chain, &t()).unwrap();
        let one = p
            .entries
            .iter()
            .find(|e| (e.theta.re - 1.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(one.members, vec![1, 3]);
        assert_eq!(one.classes, vec![3]);
        let blocks = vec![d(&[1., 2.]), d(&[1., 4.]), d(&[1., 5.])];
        let p = incompatible_partition(&blocks, DeepKind::Star, &t()).unwrap();
        let one = p
            .entries
            .iter()
            .find(|e| (e.theta.re - 1.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(one.classes, vec![2, 3]);
        assert_eq!(p.class(1), vec![C64::new(2.0, 0.0)]);
        let total: usize = p.entries.iter().map(|e| e.multiplicity).sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn chain_space_matches_direct_nullspace() {
        // Three stacked Example-1 style layers in a chain.
        let net = ex(1);
        let s = build_sampled(&net, 0.1).unwrap();
        let (a, b) = (s.phi_block(1, 1), s.phi_block(2, 2));
        let c21 = s.phi_block(2, 1);
        let diag = vec![a.clone(), b.clone(), a.clone()];
        let sub = vec![c21.clone(), c21.clone()];
        let theta = C64::new(0.1f64.exp(), 0.0);
        let space = coupling_chain_space(&diag, &sub, theta, 3, &t()).unwrap();
        let mut full = CMat::zeros(12, 12);
        for k in 0..3 {
            full.view_mut((4 * k, 4 * k), (4, 4)).copy_from(&diag[k]);
        }
        for k in 0..2 {
            full.view_mut((4 * (k + 1), 4 * k), (4, 4))
                .copy_from(&sub[k]);
        }
        let shift = shifted(theta, &full);
        for r in 0..space.homogeneous.nrows() {
            let v = space.homogeneous.row(r).into_owned();
            assert!((&v * &shift).norm() < 1e-9);
        }
        let direct = eigen_left_nullspace(&shift, RankTol::Auto).unwrap();
        assert_eq!(space.homogeneous.nrows(), direct.nrows());
    }

    #[test]
    fn group_space_with_zero_spokes_recovers_center() {
        let a = real(2, 2, &[2., 1., 0., 3.]);
        let b = real(2, 2, &[5., 0., 0., 7.]);
        let diag = vec![a.clone(), b.clone(), b.clone()];
        let spokes = vec![CMat::zeros(2, 2), CMat::zeros(2, 2)];
        let s = coupling_group_space(&diag, &spokes, C64::new(2.0, 0.0), &[], &t()).unwrap();
        assert_eq!(s.homogeneous.nrows(), 1);
        let v = s.homogeneous.row(0);
        assert!(v.columns(2, 4).norm() < 1e-12);
    }
}
