//! Dense open-system spin dynamics toolkit.
//!
//! Modules:
//! - [`qcore`]: complex matrices, density operators, entropies, spin operators.
//! - [`dynamics`]: Liouvillians, propagation, decay modes, FID synthesis.
//! - [`supu`]: superposed unitaries and Leggett-Garg correlators.
//! - [`leeyang`]: probe-based Lee-Yang zero extraction for a two-site Ising pair.
//! - [`mpemba`]: Mpemba relaxation of two dipolar-coupled spins.
//! - [`entloc`]: entanglement localization channels and coherence-order dephasing.
//! - [`cli`]: configuration, experiment runner and CSV output.

pub mod cli;
pub mod dynamics;
pub mod entloc;
pub mod error;
pub mod leeyang;
pub mod mpemba;
pub mod optim;
pub mod qcore;
pub mod supu;

pub use error::{Error, Result};
