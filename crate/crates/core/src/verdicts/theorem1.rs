//! Matrix-equation test on the unknowns `F^K ∈ C^{N × n_K}`.
//!
//! With row-major vectorisation `f = vec(F)` the identities
//! `vec(X F Y) = vec(F)(Xᵀ ⊗ Y)` turn the per-layer equations into
//!
//! * `F^K(sI − e^{A^K h})      → f^K (I ⊗ (sI − e^{A^K h}))`
//! * `(W^K)ᵀ F^K ℋ^K           → f^K (W^K ⊗ ℋ^K)`
//! * `(D^{L,K})ᵀ F^L 𝒫^{L,K}   → f^L (D^{L,K} ⊗ 𝒫^{L,K})`
//! * `Δ^K F^K ℬ^K              → f^K (Δ^K ⊗ ℬ^K)`
//!
//! so the whole system is one left-null-space problem per `s`.

use super::{make_witness, Diagnostics, Method, Status, Verdict};
use crate::assemble::{build_sampled, SampledSystem};
use crate::error::Result;
use crate::matops::{
    clustered_spectrum, from_real, kron, left_nullspace, CMat, RowVec, Tolerances, C64,
};
use crate::netmodel::MultilayerNetwork;

/// Non-trivial solutions of the matrix equations at each tested `s`.
#[derive(Debug, Clone)]
pub struct TheoremOneSolutionSpace {
    /// `(s, basis)` with one stacked `[vec F^1, …, vec F^M]` per row; only
    /// values with a non-trivial solution are listed.
    pub solutions: Vec<(C64, CMat)>,
    /// Total number of unknowns `Σ_K N n_K`.
    pub unknowns: usize,
}

impl TheoremOneSolutionSpace {
    pub fn is_trivial(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Unpack one stacked solution into the matrices `F^1, …, F^M`.
    pub fn unpack(net: &MultilayerNetwork, f: &RowVec) -> Vec<CMat> {
        let nodes = net.nodes();
        let mut off = 0;
        net.layers
            .iter()
            .map(|layer| {
                let n = layer.n();
                let m = CMat::from_fn(nodes, n, |i, j| f[off + i * n + j]);
                off += nodes * n;
                m
            })
            .collect()
    }
}

/// The linear operator `f ↦ [eq. (state) | eq. (input)]` at `s`, assembled
/// block by block from the layer and coupling data.
pub fn theorem1_operator(net: &MultilayerNetwork, sys: &SampledSystem, s: C64) -> CMat {
    let nodes = net.nodes();
    let widths: Vec<usize> = net.layers.iter().map(|l| nodes * l.n()).collect();
    let offs: Vec<usize> = widths
        .iter()
        .scan(0, |a, w| {
            let o = *a;
            *a += w;
            Some(o)
        })
        .collect();
    let total: usize = widths.iter().sum();
    let inputs: Vec<usize> = net.layers.iter().map(|l| nodes * l.p()).collect();
    let in_total: usize = inputs.iter().sum();
    let mut op = CMat::zeros(total, total + in_total);
    let mut in_off = total;
    for (k, layer) in net.layers.iter().enumerate() {
        let b = &sys.layer_blocks[k];
        let n = layer.n();
        let eye = CMat::identity(nodes, nodes);
        let shifted_e = CMat::identity(n, n) * s - &b.exp_ah;
        let block = kron(&eye, &shifted_e) - kron(&from_real(&layer.w), &b.hcal);
        op.view_mut((offs[k], offs[k]), block.shape())
            .copy_from(&block);
        let input = kron(&from_real(&layer.delta_matrix()), &b.bcal);
        op.view_mut((offs[k], in_off), input.shape())
            .copy_from(&input);
        in_off += inputs[k];
    }
    for c in &net.couplings {
        // Equation of layer `from` receives −f^{to}(D ⊗ 𝒫) from the layer it drives.
        let pcal = sys.pcal(c.to, c.from).expect("coupling block present");
        let block = -kron(&from_real(&c.d), pcal);
        op.view_mut((offs[c.to - 1], offs[c.from - 1]), block.shape())
            .copy_from(&block);
    }
    op
}

/// Solve the equations at every clustered eigenvalue of `Φ_s` (elsewhere
/// `sI − Φ_s` is invertible and only the trivial solution exists).
pub fn theorem1_solutions(
    net: &MultilayerNetwork,
    sys: &SampledSystem,
    tol: &Tolerances,
) -> Result<TheoremOneSolutionSpace> {
    let mut solutions = Vec::new();
    for c in clustered_spectrum(&sys.phi, tol)? {
        let null = left_nullspace(&theorem1_operator(net, sys, c.value), tol.rank)?;
        if null.nrows() > 0 {
            solutions.push((c.value, null));
        }
    }
    Ok(TheoremOneSolutionSpace {
        solutions,
        unknowns: sys.state_dim(),
    })
}

/// Sufficient test: only the trivial solution certifies controllability;
/// otherwise the verdict is `Inconclusive` with the solution as witness.
pub fn theorem1_test(net: &MultilayerNetwork, h: f64, tol: &Tolerances) -> Result<Verdict> {
    let sys = build_sampled(net, h)?;
    let space = theorem1_solutions(net, &sys, tol)?;
    let mut diag = Diagnostics::new(sys.state_dim(), tol);
    diag.sufficiency_only = true;
    diag.ranks.push((
        "solution_dim".into(),
        space.solutions.iter().map(|(_, b)| b.nrows()).sum(),
    ));
    let Some((s, basis)) = space.solutions.first() else {
        return Ok(Verdict {
            status: Status::Controllable,
            method: Method::Theorem1,
            witness: None,
            diagnostics: diag,
        });
    };
    diag.notes.push(format!(
        "non-trivial solutions at {} eigenvalue(s); the test is sufficient only",
        space.solutions.len()
    ));
    let w = make_witness(
        &sys.phi,
        &sys.psi,
        *s,
        basis.row(0).into_owned(),
        "non-trivial F^K",
    );
    Ok(Verdict {
        status: Status::Inconclusive,
        method: Method::Theorem1,
        witness: Some(w),
        diagnostics: diag,
    })
}
