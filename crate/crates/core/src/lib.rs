//! Controllability analysis for multilayer networked sampled-data systems.
//!
//! A network of `M` layers, each holding `N` identical LTI node systems, is
//! coupled through intra-layer topologies `W^K` and inter-layer topologies
//! `D^{K,L}`. Zero-order holds on the control and transmission channels turn
//! the continuous dynamics into a discrete pair `(Φ_s, Ψ_s)`, or into a lifted
//! pair when different channels are sampled at different rates.
//!
//! The crate is organised bottom-up:
//!
//! * [`matops`]: dense complex kernels (matrix exponential, ZOH integral,
//!   rank/nullspace, clustered spectra, left Jordan chains).
//! * [`netmodel`]: the network data model, spec-file parser and structure
//!   classification.
//! * [`assemble`]: Kronecker assembly of continuous, sampled and lifted pairs.
//! * [`spectra`]: block spectra and eigenspaces built from intra-layer chains.
//! * [`verdicts`]: Kalman/PBH baselines and the decomposed controllability
//!   tests.
//! * [`report`] and [`cli`]: text reports, CSV output and the command line.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assemble;
pub mod cli;
pub mod error;
pub mod matops;
pub mod netmodel;
pub mod report;
pub mod spectra;
pub mod verdicts;

pub use error::{Error, Result};
pub use matops::{CMat, RankTol, RowVec, Tolerances, C64};
