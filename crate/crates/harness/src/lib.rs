//! Experiment harness for the Kac lattice gas: configuration, orchestration
//! of simulation sweeps and rate evaluations, and persistence of results.

pub mod config;
pub mod experiments;
pub mod output;
pub mod sim;
