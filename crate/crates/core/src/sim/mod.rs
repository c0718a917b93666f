//! Monte Carlo model of repetitive single-spin readout.
//!
//! Each cycle maps the logical state onto an ancilla through a noisy copy,
//! then renders a spin-selective tunnelling trace with a three-state
//! (spin-up, spin-down, empty) jump process plus white noise.

mod config;
pub mod io;
mod run;
mod trace;

pub use config::{extended_f64, SimConfig};
pub use run::{simulate_cycles, simulate_run, simulate_states, RunRecord};
pub use trace::{add_gaussian_noise, ancilla_events, render_levels, sample_ancilla_trace, DotState, Trace};
