//! Simulator and feasibility analyzer for a cavity-mediated two-qubit gate
//! on semiconductor quantum-dot spin qubits.
//!
//! Each dot is a three-level Lambda system (two electron-spin ground states
//! plus a charged-exciton level) coupled to one truncated cavity mode. The
//! crate propagates the full model, the adiabatically eliminated single-dot
//! Raman model, and the two-qubit XY model; checks the adiabatic-regime
//! conditions; solves the 2*pi pulse-area constraint; and scans the
//! (cavity coupling, pulse width) plane for the feasible gate region.

pub mod cli;
pub mod config;
pub mod device;
pub mod dynamics;
pub mod encoding;
pub mod error;
pub mod feasibility;
mod numerics;
pub mod output;
pub mod quantum;
pub mod units;

pub use error::{Error, Result};
