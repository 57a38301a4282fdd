//! Dense complex linear-algebra kernels.
//!
//! Every matrix in the crate is a [`CMat`] (dense, column-major, complex
//! double precision). Left eigenvectors and chain vectors are row vectors
//! ([`RowVec`]) acting from the left, matching how controllability witnesses
//! are written: `η (θI − Φ) = 0`, `η Ψ = 0`.

mod chains;
mod expm;
pub(crate) mod linalg;
mod spectrum;

pub use chains::{
    generalized_chains_at, generalized_left_jordan_chains, left_jordan_chains,
    left_jordan_chains_at, trim_chain, ChainFamily, GeneralizedChainFamily,
};
pub use expm::{expm, expm_and_zoh, expm_raw, zoh_integral};
pub use linalg::{
    eigen_left_nullspace, left_nullspace, numerical_rank, rank_threshold, row_basis,
    singular_values, solve_left, LeftSolve,
};
pub use spectrum::{cluster_values, clustered_spectrum, eigenvalues, spectral_order, Eigencluster};

use nalgebra::{DMatrix, RowDVector};
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type RowVec = RowDVector<C64>;

/// Threshold used for every rank decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankTol {
    /// `max(rows, cols) · σ_max · 2^-48`.
    Auto,
    /// Singular values at or below this value count as zero.
    Absolute(f64),
}

/// Tolerances surfaced to callers (and to the CLI).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: RankTol,
    /// Eigenvalue merge tolerance, relative to `max(1, spectral radius)`.
    pub eig: f64,
    /// Relative residual accepted for "satisfies the equation" checks.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: RankTol::Auto,
            eig: 1e-8,
            residual: 1e-9,
        }
    }
}

impl Tolerances {
    /// Absolute eigenvalue merge distance for a spectrum of the given radius.
    pub fn eig_abs(&self, spectral_radius: f64) -> f64 {
        self.eig * spectral_radius.max(1.0)
    }
}

/// Real row-major data as a complex matrix.
pub fn real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(data.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| C64::new(data[i * cols + j], 0.0))
}

pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc)).copy_from(&(b * s));
        }
    }
    out
}

/// Kronecker product of row vectors.
pub fn kron_row(a: &RowVec, b: &RowVec) -> RowVec {
    RowVec::from_fn(a.len() * b.len(), |_, k| a[k / b.len()] * b[k % b.len()])
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hcat(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hcat row mismatch");
        out.view_mut((0, c), b.shape()).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share the column count.
pub fn vcat(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vcat column mismatch");
        out.view_mut((r, 0), b.shape()).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Stack row vectors into a matrix (one vector per row).
pub fn stack_rows(rows: &[RowVec], width: usize) -> CMat {
    let mut out = CMat::zeros(rows.len(), width);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), width);
        out.row_mut(i).copy_from(r);
    }
    out
}

pub fn rows_of(m: &CMat) -> Vec<RowVec> {
    (0..m.nrows()).map(|i| m.row(i).into_owned()).collect()
}

/// `θ I − M`.
pub fn shifted(theta: C64, m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::identity(n, n) * theta - m
}

/// Frobenius norm of a complex matrix.
pub fn fro(m: &CMat) -> f64 {
    m.norm()
}

/// Fix the gauge of a row vector: unit Euclidean norm, first significant entry
/// real and positive. Returns the complex factor that was applied.
pub fn gauge_factor(v: &RowVec) -> C64 {
    let norm = v.norm();
    if norm == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let lead = v
        .iter()
        .find(|z| z.norm() > 1e-10 * norm)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead / lead.norm();
    C64::new(1.0 / norm, 0.0) / phase
}

pub fn gauge(v: &RowVec) -> RowVec {
    v * gauge_factor(v)
}

/// Relative residual `‖v M‖ / (‖v‖ ‖M‖)` (0 for a zero vector or matrix).
pub fn left_residual(v: &RowVec, m: &CMat) -> f64 {
    let denom = v.norm() * m.norm();
    if denom == 0.0 {
        0.0
    } else {
        (v * m).norm() / denom
    }
}

/// Largest eigenvalue magnitude bound via the Frobenius norm, used to scale
/// tolerances when the spectrum itself is not at hand.
pub fn scale_of(m: &CMat) -> f64 {
    m.norm().max(1.0)
}
