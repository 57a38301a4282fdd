//! Controllability verdicts.
//!
//! Baselines ([`kalman_test`], [`pbh_test`]) work on any assembled pair. The
//! decomposed tests exploit the Kronecker and block-triangular structure of
//! the sampled network and are sufficient conditions in general; they only
//! return `Uncontrollable` where a necessity argument applies (nonsingular
//! state matrix, or confirmation by the Kalman oracle).

mod analysis;
mod baseline;
mod deep;
mod structured;
mod theorem1;

pub use analysis::{analyze, AnalysisOutcome, AnalysisRequest, MethodChoice};
pub use baseline::{
    kalman_matrix_rank, kalman_test, node_pbh, pbh_pair, pbh_test, reachable_subspace,
};
pub use deep::deep_test;
pub use structured::{
    drive_response_test, homogeneous_test, multirate_test, topology_necessity_test,
};
pub use theorem1::{theorem1_operator, theorem1_test, TheoremOneSolutionSpace};

use crate::error::Result;
use crate::matops::{clustered_spectrum, hcat, shifted, CMat, RowVec, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Controllable,
    Uncontrollable,
    Inconclusive,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Controllable => "Controllable",
            Status::Uncontrollable => "Uncontrollable",
            Status::Inconclusive => "Inconclusive",
        }
    }

    /// CLI exit code for this status.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Controllable => 0,
            Status::Uncontrollable => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn is_decisive(self) -> bool {
        self != Status::Inconclusive
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which test produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Kalman,
    Pbh,
    /// Matrix-equation test on the stacked unknowns `F^K`.
    Theorem1,
    /// Two-layer drive-response decomposition.
    Theorem2,
    /// Homogeneous drive-response decomposition.
    Theorem3,
    /// Deep chain structure.
    Theorem4,
    /// Deep star structure.
    Theorem5,
    /// Drive-layer topology screen.
    Corollary2,
    /// Homogeneous topology screen.
    Corollary3,
    /// Slow inter-layer sampling.
    Corollary4,
    /// Multi-scale sampling.
    Corollary5,
    /// Fast control sampling.
    Corollary6,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Kalman => "kalman",
            Method::Pbh => "pbh",
            Method::Theorem1 => "theorem1",
            Method::Theorem2 => "theorem2",
            Method::Theorem3 => "theorem3",
            Method::Theorem4 => "theorem4",
            Method::Theorem5 => "theorem5",
            Method::Corollary2 => "corollary2",
            Method::Corollary3 => "corollary3",
            Method::Corollary4 => "corollary4",
            Method::Corollary5 => "corollary5",
            Method::Corollary6 => "corollary6",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Certificate of a rank deficiency: `vector · [θI − Φ̆, Ψ̆] ≈ 0`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub eigenvalue: C64,
    /// Full-length left vector over the state of the system tested.
    pub vector: RowVec,
    /// Identifier of the violated condition.
    pub condition: String,
    /// `‖w[θI−Φ̆, Ψ̆]‖ / (‖w‖ max(1, ‖[θI−Φ̆, Ψ̆]‖))`.
    pub residual: f64,
}

/// Outcome of an intra-layer input check (diagnostic).
#[derive(Debug, Clone)]
pub struct LayerCheck {
    pub layer: usize,
    pub eigenvalue: C64,
    pub passed: bool,
    /// Annihilating eigenvector of the layer block, when the check fails.
    pub witness: Option<RowVec>,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub state_dim: usize,
    /// Dimension of the reachable subspace, when computed.
    pub reach_rank: Option<usize>,
    /// Named auxiliary ranks.
    pub ranks: Vec<(String, usize)>,
    pub notes: Vec<String>,
    pub layer_checks: Vec<LayerCheck>,
    pub tolerances: Tolerances,
    /// The method is sufficient only (a pass certifies, a failure does not).
    pub sufficiency_only: bool,
}

impl Diagnostics {
    pub fn new(state_dim: usize, tol: &Tolerances) -> Self {
        Diagnostics {
            state_dim,
            reach_rank: None,
            ranks: Vec::new(),
            notes: Vec::new(),
            layer_checks: Vec::new(),
            tolerances: *tol,
            sufficiency_only: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub method: Method,
    pub witness: Option<Witness>,
    pub diagnostics: Diagnostics,
}

/// Relative residual of a candidate witness against `[θI − Φ, Ψ]`.
pub fn witness_residual(phi: &CMat, psi: &CMat, theta: C64, w: &RowVec) -> f64 {
    let m = hcat(&[&shifted(theta, phi), psi]);
    let denom = w.norm() * m.norm().max(1.0);
    if denom == 0.0 {
        return f64::INFINITY;
    }
    (w * m).norm() / denom
}

pub(crate) fn make_witness(
    phi: &CMat,
    psi: &CMat,
    theta: C64,
    vector: RowVec,
    condition: impl Into<String>,
) -> Witness {
    let vector = crate::matops::gauge(&vector);
    Witness {
        eigenvalue: theta,
        residual: witness_residual(phi, psi, theta, &vector),
        vector,
        condition: condition.into(),
    }
}

/// `0 ∉ σ(Φ)` under the eigenvalue merge tolerance.
pub fn is_nonsingular(phi: &CMat, tol: &Tolerances) -> Result<bool> {
    let spec = clustered_spectrum(phi, tol)?;
    let rho = spec.iter().map(|c| c.value.norm()).fold(0.0, f64::max);
    let eps = tol.eig_abs(rho);
    Ok(spec.iter().all(|c| c.value.norm() > eps))
}

/// Deterministic fold: the earliest eigenvalue (magnitude, then phase) wins;
/// among failures at the same eigenvalue the first recorded wins.
pub(crate) fn first_failure(mut candidates: Vec<Witness>) -> Option<Witness> {
    candidates.sort_by(|a, b| crate::matops::spectral_order(&a.eigenvalue, &b.eigenvalue));
    candidates.into_iter().next()
}
