//! Hybrid classical-quantum circuit simulation.
//!
//! Long-range two-qubit gates can be cut out of a circuit and replaced by
//! a classical interface: measure the gate qubits with an informationally
//! complete POVM, sample a repreparation outcome from a quasi-probability
//! table derived from a dual-frame representation of the gate, and restart
//! the quantum evolution from the sampled product state. Weighted shot
//! averages reproduce the original circuit's expectation values without
//! bias; the cost is a sampling overhead ("negativity") that this crate
//! can also minimize by annealing over alternative dual frames.
//!
//! Module map:
//! - [`frames`]: POVMs, overlap matrices, duals, channel transfer matrices
//! - [`densim`]: dense density-matrix evolution, measurement, noise
//! - [`qcq`]: the measure-and-reprepare sampling engine
//! - [`negopt`]: sampling-overhead minimization over dual frames
//! - [`circuits`]: circuit type plus the Bell/CHSH and Ising builders
//! - [`noise`], [`gates`], [`linalg`], [`stats`], [`io`]: support

pub mod circuits;
pub mod densim;
pub mod error;
pub mod frames;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod negopt;
pub mod noise;
pub mod qcq;
pub mod stats;

pub use circuits::{Circuit, HvaParams, LongRange, Op};
pub use densim::{DensityMatrix, Observable, StateVector};
pub use error::{Error, Result};
pub use frames::{DualCoefficients, FactorableFrame, Provenance, SingleQubitFrame};
pub use negopt::{AnnealConfig, AnnealResult};
pub use noise::NoiseModel;
pub use qcq::{Estimate, InterfaceDuals, QcqEngine, Readout, ShotOutcome};
