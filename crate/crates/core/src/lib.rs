//! Simulation, calibration and hidden-Markov decoding of repetitive
//! quantum-non-demolition readout of a spin qubit.
//!
//! * [`sim`] generates sensor traces for repeated ancilla readouts.
//! * [`calibration`] turns labelled traces into peak-signal histograms,
//!   error rates and a readout time.
//! * [`hmm`] infers the initial logical state from per-cycle outcomes.
//! * [`experiments`] runs the Monte Carlo studies and fits built on top.

pub mod calibration;
pub mod error;
pub mod experiments;
pub mod hmm;
pub mod seed;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
