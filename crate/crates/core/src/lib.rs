//! Symmetry benchmarking on conserved subspaces.
//!
//! A dense density-matrix simulator together with the benchmarking protocol:
//! one-design ensembles on symmetry sectors, randomized noisy sequences,
//! exponential-decay fitting, and extraction of the per-step leakage rate
//! `mu = 1 - Gamma_1` out of the conserved sector, for plain and interleaved
//! sequences.
//!
//! Conventions: qubit `q` is bit `q` of a basis index (qubit 0 is the least
//! significant bit), and superoperators act on column-stacked matrices.

pub mod campaign;
pub mod channels;
pub mod eccbench;
pub mod error;
pub mod fitting;
pub mod linalg;
pub mod onedesign;
pub mod parity;
pub mod protocol;
pub mod qstate;

pub use error::{Error, Result};
