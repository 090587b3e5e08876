//! Library side of the `qcq` command: layered configuration, experiment
//! drivers, invariant checks, and report emission. The binary in
//! `main.rs` is a thin argument-parsing shell over these modules.

pub mod config;
pub mod experiments;
pub mod report;
pub mod validate;
