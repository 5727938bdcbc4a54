//! Phase-space simulation and query-efficient learning of bosonic Gaussian
//! unitaries `G = D_r U_S`.
//!
//! Everything here is pure `alloc` + `libm` matrix arithmetic so the crate
//! builds without `std`. File formats, the experiment runner and the CLI
//! live in the `gaussian-tomo` companion crate.
//!
//! Conventions used throughout:
//!
//! - quadratures are interleaved, `(x_1, p_1, ..., x_n, p_n)`;
//! - covariance matrices use the vacuum-equals-identity normalization, so a
//!   coherent state has covariance `1` and heterodyne outcomes are
//!   distributed as `N(m, (V + 1) / 2)`;
//! - multi-register states are ordered `(signal block | ancilla block)`;
//! - `‖·‖∞` is the operator (spectral) norm and `‖·‖₂` the Frobenius norm.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bounds;
mod error;
pub mod linalg;
pub mod measurement;
pub mod phase_space;
pub mod rng;
pub mod symplectic;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, RealVector};
pub use phase_space::{GaussianState, GaussianUnitary, ProtocolMoments};
pub use symplectic::{EulerFactors, SymplecticMatrix, SYMPL_TOL};
