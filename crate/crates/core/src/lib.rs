//! Simulation toolkit for a silicon-donor cluster-state architecture.
//!
//! The crate covers the full stack: packed stabilizer tableaux
//! ([`pauli`]), graph states with local-Clifford vertex operators
//! ([`graph`]), the donor lattice and its global-operation protocols
//! ([`donor`]), pulse-level validation of the composite controlled-phase gate
//! ([`pulse`]), measurement-based computation on the resulting cluster
//! ([`mbqc`]), and defect, noise and timing models ([`defects`]).

pub mod cli;
pub mod clifford;
pub mod config;
pub mod defects;
pub mod donor;
pub mod graph;
pub mod mbqc;
pub mod pauli;
pub mod pulse;
pub mod rng;
pub mod statevector;
