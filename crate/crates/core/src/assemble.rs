//! Kronecker assembly of continuous, sampled and lifted system pairs.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matops::{block_diag, expm_and_zoh, from_real, hcat, kron, CMat};
use crate::netmodel::{classify_structure, LayerSpec, MultilayerNetwork};

/// Sampling pattern of the transmission and control channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    SingleRate,
    /// Inter-layer channel sampled every `lh`, everything else every `h`.
    SlowInterLayer,
    /// Drive layer at `lh`, response layer at `h`, inter-layer channel at `lh`.
    MultiScale,
    /// Transmission channels at `lh`, control inputs at `h`.
    FastControl,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::SingleRate => "single",
            Pattern::SlowInterLayer => "slow-inter",
            Pattern::MultiScale => "multiscale",
            Pattern::FastControl => "fast-control",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Pattern::SingleRate),
            "slow-inter" => Ok(Pattern::SlowInterLayer),
            "multiscale" => Ok(Pattern::MultiScale),
            "fast-control" => Ok(Pattern::FastControl),
            other => Err(Error::Argument(format!(
                "unknown pattern '{other}' (expected single, slow-inter, multiscale or fast-control)"
            ))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps (layer, node, component) to global state rows and layer input columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockIndex {
    nodes: usize,
    state_dims: Vec<usize>,
    state_offsets: Vec<usize>,
    input_offsets: Vec<usize>,
    input_widths: Vec<usize>,
}

impl BlockIndex {
    fn new(nodes: usize, state_dims: Vec<usize>, input_widths: Vec<usize>) -> Self {
        let prefix = |v: &[usize]| {
            let mut acc = 0;
            v.iter()
                .map(|&x| {
                    let o = acc;
                    acc += x;
                    o
                })
                .collect()
        };
        let blocks: Vec<usize> = state_dims.iter().map(|n| n * nodes).collect();
        BlockIndex {
            nodes,
            state_offsets: prefix(&blocks),
            input_offsets: prefix(&input_widths),
            state_dims,
            input_widths,
        }
    }

    /// Global state rows of layer `k` (1-based).
    pub fn state_range(&self, k: usize) -> Range<usize> {
        let o = self.state_offsets[k - 1];
        o..o + self.nodes * self.state_dims[k - 1]
    }

    /// Input columns of layer `k` (1-based).
    pub fn input_range(&self, k: usize) -> Range<usize> {
        let o = self.input_offsets[k - 1];
        o..o + self.input_widths[k - 1]
    }

    /// Global row of state component `comp` of node `node` (0-based) in layer `k`.
    pub fn state_index(&self, k: usize, node: usize, comp: usize) -> usize {
        assert!(node < self.nodes && comp < self.state_dims[k - 1]);
        self.state_offsets[k - 1] + node * self.state_dims[k - 1] + comp
    }

    /// Inverse of [`BlockIndex::state_index`].
    pub fn locate(&self, row: usize) -> Option<(usize, usize, usize)> {
        for k in 1..=self.state_dims.len() {
            let r = self.state_range(k);
            if r.contains(&row) {
                let local = row - r.start;
                let n = self.state_dims[k - 1];
                return Some((k, local / n, local % n));
            }
        }
        None
    }

    pub fn layers(&self) -> usize {
        self.state_dims.len()
    }
}

/// The continuous pair `(Φ, Ψ)`.
#[derive(Debug, Clone)]
pub struct ContinuousSystem {
    pub phi: CMat,
    pub psi: CMat,
    pub index: BlockIndex,
}

/// Per-layer ZOH quantities at one period.
#[derive(Debug, Clone)]
pub struct LayerBlocks {
    /// `e^{A h}`.
    pub exp_ah: CMat,
    /// `G(h) = ∫_0^h e^{Aτ} dτ`.
    pub g: CMat,
    /// `ℋ(h) = G(h) H C`.
    pub hcal: CMat,
    /// `ℬ(h) = G(h) B`.
    pub bcal: CMat,
}

/// `𝒫^{K,L}(h) = G^K(h) P^{K,L} C^L` for one coupling.
#[derive(Debug, Clone)]
pub struct CouplingBlock {
    pub to: usize,
    pub from: usize,
    pub pcal: CMat,
}

/// A sampled (possibly lifted) pair with its sampling metadata.
#[derive(Debug, Clone)]
pub struct SampledSystem {
    pub phi: CMat,
    pub psi: CMat,
    /// Fast (base) period.
    pub h: f64,
    /// Rate ratio; 1 for single-rate.
    pub l: usize,
    pub pattern: Pattern,
    pub index: BlockIndex,
    /// Layer blocks at the base period `h`.
    pub layer_blocks: Vec<LayerBlocks>,
    /// Coupling blocks at the base period `h`.
    pub coupling_blocks: Vec<CouplingBlock>,
}

impl SampledSystem {
    pub fn state_dim(&self) -> usize {
        self.phi.nrows()
    }

    /// `Φ^{K,L}` block (1-based layers).
    pub fn phi_block(&self, k: usize, l: usize) -> CMat {
        let (r, c) = (self.index.state_range(k), self.index.state_range(l));
        self.phi
            .view((r.start, c.start), (r.len(), c.len()))
            .into_owned()
    }

    /// `Ψ^{K,K}` block.
    pub fn psi_block(&self, k: usize) -> CMat {
        let (r, c) = (self.index.state_range(k), self.index.input_range(k));
        self.psi
            .view((r.start, c.start), (r.len(), c.len()))
            .into_owned()
    }

    /// `𝒫^{K,L}(h)` if the coupling exists.
    pub fn pcal(&self, to: usize, from: usize) -> Option<&CMat> {
        self.coupling_blocks
            .iter()
            .find(|c| c.to == to && c.from == from)
            .map(|c| &c.pcal)
    }
}

fn real(m: &nalgebra::DMatrix<f64>) -> CMat {
    from_real(m)
}

/// ZOH quantities of one layer at period `h ≥ 0`.
pub fn layer_blocks(layer: &LayerSpec, h: f64) -> Result<LayerBlocks> {
    let (exp_ah, g) = expm_and_zoh(&real(&layer.a), h)?;
    let hcal = &g * real(&layer.h) * real(&layer.c);
    let bcal = &g * real(&layer.b);
    Ok(LayerBlocks {
        exp_ah,
        g,
        hcal,
        bcal,
    })
}

/// `𝒫^{K,L}(h)` for every coupling of the network.
pub fn coupling_blocks(net: &MultilayerNetwork, blocks: &[LayerBlocks]) -> Vec<CouplingBlock> {
    net.couplings
        .iter()
        .map(|c| CouplingBlock {
            to: c.to,
            from: c.from,
            pcal: &blocks[c.to - 1].g * real(&c.p) * real(&net.layer(c.from).c),
        })
        .collect()
}

/// `I_N ⊗ e^{Ah} + W ⊗ ℋ(h)`.
pub fn sampled_diagonal_block(layer: &LayerSpec, b: &LayerBlocks) -> CMat {
    let n = layer.nodes();
    kron(&CMat::identity(n, n), &b.exp_ah) + kron(&real(&layer.w), &b.hcal)
}

/// `Δ ⊗ ℬ(h)`.
pub fn sampled_input_block(layer: &LayerSpec, b: &LayerBlocks) -> CMat {
    kron(&real(&layer.delta_matrix()), &b.bcal)
}

fn index_for(net: &MultilayerNetwork, input_widths: Vec<usize>) -> BlockIndex {
    BlockIndex::new(
        net.nodes(),
        net.layers.iter().map(LayerSpec::n).collect(),
        input_widths,
    )
}

fn single_rate_widths(net: &MultilayerNetwork) -> Vec<usize> {
    net.layers.iter().map(|l| l.nodes() * l.p()).collect()
}

/// Place diagonal and coupling blocks into a full state matrix.
fn place(index: &BlockIndex, diag: &[CMat], off: &[(usize, usize, CMat)]) -> CMat {
    let d = index.state_range(index.layers()).end;
    let mut phi = CMat::zeros(d, d);
    for (k, b) in diag.iter().enumerate() {
        let r = index.state_range(k + 1);
        phi.view_mut((r.start, r.start), b.shape()).copy_from(b);
    }
    for (to, from, b) in off {
        let (r, c) = (index.state_range(*to), index.state_range(*from));
        phi.view_mut((r.start, c.start), b.shape()).copy_from(b);
    }
    phi
}

/// Continuous pair: `Φ^{K,K} = I⊗A + W⊗HC`, `Φ^{K,L} = D⊗PC^L`, `Ψ = diag(Δ⊗B)`.
pub fn build_continuous(net: &MultilayerNetwork) -> ContinuousSystem {
    let index = index_for(net, single_rate_widths(net));
    let diag: Vec<CMat> = net
        .layers
        .iter()
        .map(|l| {
            let n = l.nodes();
            kron(&CMat::identity(n, n), &real(&l.a)) + kron(&real(&l.w), &real(&(&l.h * &l.c)))
        })
        .collect();
    let off: Vec<(usize, usize, CMat)> = net
        .couplings
        .iter()
        .map(|c| {
            let pc = &c.p * &net.layer(c.from).c;
            (c.to, c.from, kron(&real(&c.d), &real(&pc)))
        })
        .collect();
    let phi = place(&index, &diag, &off);
    let psi = block_diag(
        &net.layers
            .iter()
            .map(|l| kron(&real(&l.delta_matrix()), &real(&l.b)))
            .collect::<Vec<_>>(),
    );
    ContinuousSystem { phi, psi, index }
}

/// Single-rate ZOH-sampled pair at period `h > 0`.
pub fn build_sampled(net: &MultilayerNetwork, h: f64) -> Result<SampledSystem> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Argument(format!(
            "sampling period must be positive, got {h}"
        )));
    }
    let blocks = net
        .layers
        .iter()
        .map(|l| layer_blocks(l, h))
        .collect::<Result<Vec<_>>>()?;
    let cblocks = coupling_blocks(net, &blocks);
    let index = index_for(net, single_rate_widths(net));
    let diag: Vec<CMat> = net
        .layers
        .iter()
        .zip(&blocks)
        .map(|(l, b)| sampled_diagonal_block(l, b))
        .collect();
    let off: Vec<(usize, usize, CMat)> = net
        .couplings
        .iter()
        .zip(&cblocks)
        .map(|(c, cb)| (c.to, c.from, kron(&real(&c.d), &cb.pcal)))
        .collect();
    let phi = place(&index, &diag, &off);
    let psi = block_diag(
        &net.layers
            .iter()
            .zip(&blocks)
            .map(|(l, b)| sampled_input_block(l, b))
            .collect::<Vec<_>>(),
    );
    Ok(SampledSystem {
        phi,
        psi,
        h,
        l: 1,
        pattern: Pattern::SingleRate,
        index,
        layer_blocks: blocks,
        coupling_blocks: cblocks,
    })
}

fn powers(m: &CMat, count: usize) -> Vec<CMat> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(count);
    let mut acc = CMat::identity(n, n);
    for _ in 0..count {
        out.push(acc.clone());
        acc = &acc * m;
    }
    out
}

/// `[M^{l−1} Ψ, …, M Ψ, Ψ]`: inputs applied every `h`, earliest first.
fn stacked_inputs(pows: &[CMat], psi: &CMat) -> CMat {
    let blocks: Vec<CMat> = pows.iter().rev().map(|p| p * psi).collect();
    hcat(&blocks.iter().collect::<Vec<_>>())
}

/// `(Σ_{k<l} M^k) X`.
fn accumulated(pows: &[CMat], x: &CMat) -> CMat {
    let n = pows[0].nrows();
    let sum = pows.iter().fold(CMat::zeros(n, n), |acc, p| acc + p);
    sum * x
}

/// Multi-rate lifted pair at the slow period `lh`. Only two-layer
/// drive-response networks are supported; `l = 1` returns the single-rate
/// pair (tagged with the requested pattern).
pub fn lift_multirate(
    net: &MultilayerNetwork,
    h: f64,
    l: usize,
    pattern: Pattern,
) -> Result<SampledSystem> {
    if l < 1 {
        return Err(Error::Argument("rate ratio l must be at least 1".into()));
    }
    let base = build_sampled(net, h)?;
    if pattern == Pattern::SingleRate {
        if l != 1 {
            return Err(Error::Argument("single-rate pattern requires l = 1".into()));
        }
        return Ok(base);
    }
    if !classify_structure(net, 1e-8).is_drive_response() {
        return Err(Error::Unsupported(format!(
            "multi-rate pattern '{pattern}' is defined only for two-layer drive-response networks"
        )));
    }
    if l == 1 {
        return Ok(SampledSystem { pattern, ..base });
    }
    let (l1, l2) = (net.layer(1), net.layer(2));
    let coupling = net.coupling(2, 1).expect("drive-response has (2,1)");
    let p11 = base.phi_block(1, 1);
    let p22 = base.phi_block(2, 2);
    let p21 = base.phi_block(2, 1);
    let s11 = base.psi_block(1);
    let s22 = base.psi_block(2);
    let pow11 = powers(&p11, l + 1);
    let pow22 = powers(&p22, l + 1);
    let lh = l as f64 * h;

    let (phi11, psi11, phi22, phi21, psi22) = match pattern {
        Pattern::SlowInterLayer => (
            pow11[l].clone(),
            stacked_inputs(&pow11[..l], &s11),
            pow22[l].clone(),
            accumulated(&pow22[..l], &p21),
            stacked_inputs(&pow22[..l], &s22),
        ),
        Pattern::MultiScale => {
            let slow1 = layer_blocks(l1, lh)?;
            (
                sampled_diagonal_block(l1, &slow1),
                sampled_input_block(l1, &slow1),
                pow22[l].clone(),
                accumulated(&pow22[..l], &p21),
                stacked_inputs(&pow22[..l], &s22),
            )
        }
        Pattern::FastControl => {
            let slow1 = layer_blocks(l1, lh)?;
            let slow2 = layer_blocks(l2, lh)?;
            let pcal = &slow2.g * real(&coupling.p) * real(&l1.c);
            (
                sampled_diagonal_block(l1, &slow1),
                fast_control_inputs(l1, h, l)?,
                sampled_diagonal_block(l2, &slow2),
                kron(&real(&coupling.d), &pcal),
                fast_control_inputs(l2, h, l)?,
            )
        }
        Pattern::SingleRate => unreachable!(),
    };
    let index = index_for(net, vec![psi11.ncols(), psi22.ncols()]);
    let phi = place(&index, &[phi11, phi22], &[(2, 1, phi21)]);
    let psi = block_diag(&[psi11, psi22]);
    Ok(SampledSystem {
        phi,
        psi,
        h,
        l,
        pattern,
        index,
        layer_blocks: base.layer_blocks,
        coupling_blocks: base.coupling_blocks,
    })
}

/// `[Δ⊗(ℬ(lh)−ℬ((l−1)h)), …, Δ⊗(ℬ(2h)−ℬ(h)), Δ⊗ℬ(h)]`.
pub fn fast_control_inputs(layer: &LayerSpec, h: f64, l: usize) -> Result<CMat> {
    let bs = (0..=l)
        .map(|j| Ok(layer_blocks(layer, j as f64 * h)?.bcal))
        .collect::<Result<Vec<_>>>()?;
    let delta = real(&layer.delta_matrix());
    let blocks: Vec<CMat> = (1..=l)
        .rev()
        .map(|j| kron(&delta, &(&bs[j] - &bs[j - 1])))
        .collect();
    Ok(hcat(&blocks.iter().collect::<Vec<_>>()))
}
