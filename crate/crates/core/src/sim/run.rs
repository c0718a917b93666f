use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trace::{sample_ancilla_trace, Trace};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::hmm::QubitState;
use crate::seed::{stream, Domain};

/// Ground truth and traces of one repetitive-readout trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub x0: QubitState,
    /// Logical state during each cycle.
    pub hidden_states: Vec<QubitState>,
    /// Ancilla state after the mapping, per cycle.
    pub ancilla_bits: Vec<QubitState>,
    pub traces: Vec<Trace>,
}

/// Hidden and ancilla state of one cycle, drawn from that cycle's stream.
///
/// Cycle 0 reads `x0` directly; later cycles first relax over `dt_rep`.
fn cycle_states(previous: QubitState, cycle: usize, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> (QubitState, QubitState) {
    let mut hidden = previous;
    if cycle > 0 {
        let decay = -(-cfg.dt_rep / cfg.t1_logical).exp_m1();
        let u: f64 = rng.random();
        if hidden.is_one() && u < decay {
            hidden = QubitState::Zero;
        }
    }
    let mut ancilla = hidden;
    if rng.random::<f64>() < cfg.p_crot_flip {
        ancilla = ancilla.flipped();
    }
    if rng.random::<f64>() < cfg.p_ancilla_init {
        ancilla = ancilla.flipped();
    }
    (hidden, ancilla)
}

/// Runs `n_cycles` cycles of trial `trial_index`, handing each cycle's
/// `(cycle, hidden, ancilla, trace)` to `visit` instead of storing traces.
pub fn simulate_cycles<F>(
    x0: QubitState,
    n_cycles: usize,
    cfg: &SimConfig,
    trial_index: u64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, QubitState, QubitState, Trace),
{
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles must be >= 1"));
    }
    cfg.validate()?;
    let mut hidden = x0;
    for cycle in 0..n_cycles {
        let mut rng = stream(cfg.master_seed, Domain::Cycle, trial_index, cycle as u64);
        let (h, ancilla) = cycle_states(hidden, cycle, cfg, &mut rng);
        hidden = h;
        let trace = sample_ancilla_trace(ancilla, cfg, &mut rng);
        visit(cycle, hidden, ancilla, trace);
    }
    Ok(())
}

/// Hidden and ancilla states only; identical to those of [`simulate_run`].
pub fn simulate_states(
    x0: QubitState,
    n_cycles: usize,
    cfg: &SimConfig,
    trial_index: u64,
) -> Result<(Vec<QubitState>, Vec<QubitState>)> {
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles must be >= 1"));
    }
    cfg.validate()?;
    let mut hidden = x0;
    let mut states = Vec::with_capacity(n_cycles);
    let mut bits = Vec::with_capacity(n_cycles);
    for cycle in 0..n_cycles {
        let mut rng = stream(cfg.master_seed, Domain::Cycle, trial_index, cycle as u64);
        let (h, ancilla) = cycle_states(hidden, cycle, cfg, &mut rng);
        hidden = h;
        states.push(h);
        bits.push(ancilla);
    }
    Ok((states, bits))
}

pub fn simulate_run(x0: QubitState, n_cycles: usize, cfg: &SimConfig, trial_index: u64) -> Result<RunRecord> {
    let mut record = RunRecord {
        x0,
        hidden_states: Vec::with_capacity(n_cycles),
        ancilla_bits: Vec::with_capacity(n_cycles),
        traces: Vec::with_capacity(n_cycles),
    };
    simulate_cycles(x0, n_cycles, cfg, trial_index, |_, hidden, ancilla, trace| {
        record.hidden_states.push(hidden);
        record.ancilla_bits.push(ancilla);
        record.traces.push(trace);
    })?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use QubitState::{One, Zero};

    #[test]
    fn ground_state_is_absorbing_and_quiet() {
        let cfg = SimConfig { sigma_noise: 0.0, ..SimConfig::default() };
        let run = simulate_run(Zero, 15, &cfg, 0).unwrap();
        assert!(run.hidden_states.iter().all(|&s| s == Zero));
        assert!(run.traces.iter().all(|t| t.samples.iter().all(|&s| s == 0.0)));
    }

    #[test]
    fn deterministic_per_trial() {
        let cfg = SimConfig { gamma_dark: 100.0, p_crot_flip: 0.1, ..SimConfig::default() };
        assert_eq!(simulate_run(One, 5, &cfg, 42).unwrap(), simulate_run(One, 5, &cfg, 42).unwrap());
        assert_ne!(simulate_run(One, 5, &cfg, 42).unwrap(), simulate_run(One, 5, &cfg, 43).unwrap());
    }

    #[test]
    fn states_match_full_run() {
        let cfg = SimConfig { p_crot_flip: 0.2, p_ancilla_init: 0.1, t1_logical: 0.01, ..SimConfig::default() };
        let run = simulate_run(One, 8, &cfg, 7).unwrap();
        let (h, a) = simulate_states(One, 8, &cfg, 7).unwrap();
        assert_eq!(run.hidden_states, h);
        assert_eq!(run.ancilla_bits, a);
        assert_eq!(run.x0, One);
        assert_eq!(h[0], One);
    }

    #[test]
    fn zero_cycles_rejected() {
        assert!(simulate_run(One, 0, &SimConfig::default(), 0).is_err());
    }

    #[test]
    fn survival_after_fourteen_intervals() {
        let cfg = SimConfig::default();
        let n = 100_000u64;
        let alive = (0..n)
            .filter(|&t| simulate_states(One, 15, &cfg, t).unwrap().0[14] == One)
            .count();
        let p = (-14.0 * 0.003263f64 / 1.8).exp();
        assert!((p - 0.9749).abs() < 1e-4);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((alive as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn transition_frequencies_match_matrix() {
        let cfg = SimConfig { t1_logical: 0.05, ..SimConfig::default() };
        let w = crate::hmm::relaxation_transition(cfg.dt_rep, cfg.t1_logical).unwrap();
        let (mut from_one, mut one_to_zero, mut from_zero, mut zero_to_one) = (0u64, 0u64, 0u64, 0u64);
        for t in 0..10_000 {
            let (h, _) = simulate_states(One, 20, &cfg, t).unwrap();
            for pair in h.windows(2) {
                match (pair[0], pair[1]) {
                    (One, next) => {
                        from_one += 1;
                        one_to_zero += (next == Zero) as u64;
                    }
                    (Zero, next) => {
                        from_zero += 1;
                        zero_to_one += (next == One) as u64;
                    }
                }
            }
        }
        assert!(from_one + from_zero >= 100_000);
        let p = w.get(1, 0);
        let se = (p * (1.0 - p) / from_one as f64).sqrt();
        assert!((one_to_zero as f64 / from_one as f64 - p).abs() < 4.0 * se);
        assert_eq!(zero_to_one, 0);
    }

    #[test]
    fn composite_flip_frequency() {
        let cfg = SimConfig { p_crot_flip: 0.1, p_ancilla_init: 0.06, t1_logical: f64::INFINITY, ..SimConfig::default() };
        let p = cfg.composite_flip_probability();
        let mut flips = 0u64;
        let mut total = 0u64;
        for t in 0..20_000 {
            let (h, a) = simulate_states(if t % 2 == 0 { One } else { Zero }, 10, &cfg, t).unwrap();
            flips += h.iter().zip(&a).filter(|(x, y)| x != y).count() as u64;
            total += h.len() as u64;
        }
        let se = (p * (1.0 - p) / total as f64).sqrt();
        assert!((flips as f64 / total as f64 - p).abs() < 4.0 * se);
    }
}
