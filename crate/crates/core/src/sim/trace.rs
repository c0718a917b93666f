use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::error::{Error, Result};
use crate::hmm::QubitState;

/// Uniformly sampled sensor current of one ancilla readout; sample `i` is taken at `i * dt_sample`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<f64>,
    pub dt_sample: f64,
}

impl Trace {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt_sample
    }

    /// Running maximum: entry `i` is the peak over samples `0..=i`.
    pub fn prefix_max(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.samples
            .iter()
            .map(|&s| {
                best = best.max(s);
                best
            })
            .collect()
    }
}

/// Charge configuration of the readout dot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DotState {
    SpinUp,
    SpinDown,
    Empty,
}

impl DotState {
    fn from_spin(s: QubitState) -> Self {
        match s {
            QubitState::One => DotState::SpinUp,
            QubitState::Zero => DotState::SpinDown,
        }
    }
}

fn waiting_time<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let unit: f64 = Exp1.sample(rng);
    if rate == f64::INFINITY {
        0.0
    } else if rate <= 0.0 {
        f64::INFINITY
    } else {
        unit / rate
    }
}

/// Jump times of the dot up to `horizon`, starting with `(0, initial state)`.
///
/// Spin-up either tunnels out or relaxes; spin-down escapes only at the dark
/// rate; an empty dot is refilled by a spin-down electron.
pub fn ancilla_events<R: Rng + ?Sized>(
    ancilla: QubitState,
    cfg: &SimConfig,
    horizon: f64,
    rng: &mut R,
) -> Vec<(f64, DotState)> {
    let mut state = DotState::from_spin(ancilla);
    let mut t = 0.0;
    let mut events = vec![(t, state)];
    loop {
        let (dt, next) = match state {
            DotState::SpinUp => {
                let out = waiting_time(cfg.gamma_out, rng);
                let relax = waiting_time(1.0 / cfg.t1_ancilla, rng);
                if out <= relax {
                    (out, DotState::Empty)
                } else {
                    (relax, DotState::SpinDown)
                }
            }
            DotState::SpinDown => (waiting_time(cfg.gamma_dark, rng), DotState::Empty),
            DotState::Empty => (waiting_time(cfg.gamma_in, rng), DotState::SpinDown),
        };
        t += dt;
        if t > horizon {
            break;
        }
        state = next;
        events.push((t, state));
    }
    events
}

/// Noiseless piecewise-constant signal: `i_high` while the dot is empty.
pub fn render_levels(events: &[(f64, DotState)], cfg: &SimConfig) -> Vec<f64> {
    let n = cfg.n_samples();
    let mut out = Vec::with_capacity(n);
    let mut next = 0;
    let mut state = DotState::SpinDown;
    for i in 0..n {
        let t = i as f64 * cfg.dt_sample;
        while next < events.len() && events[next].0 <= t {
            state = events[next].1;
            next += 1;
        }
        out.push(if state == DotState::Empty { cfg.i_high } else { cfg.i_low });
    }
    out
}

fn moving_average(levels: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return levels.to_vec();
    }
    let mut sum = 0.0;
    levels
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            sum += v;
            if i >= width {
                sum -= levels[i - width];
            }
            sum / (i + 1).min(width) as f64
        })
        .collect()
}

/// One ancilla readout: telegraph signal, optional moving average, then white noise.
pub fn sample_ancilla_trace<R: Rng + ?Sized>(ancilla: QubitState, cfg: &SimConfig, rng: &mut R) -> Trace {
    let horizon = cfg.n_samples() as f64 * cfg.dt_sample;
    let events = ancilla_events(ancilla, cfg, horizon, rng);
    let mut samples = moving_average(&render_levels(&events, cfg), cfg.filter_samples);
    if cfg.sigma_noise > 0.0 {
        let noise = Normal::new(0.0, cfg.sigma_noise).expect("validated sigma");
        for s in samples.iter_mut() {
            *s += noise.sample(rng);
        }
    }
    Trace {
        samples,
        dt_sample: cfg.dt_sample,
    }
}

/// Copy of `trace` with i.i.d. `N(0, sigma_extra^2)` added to every sample.
///
/// The same `rng` state with different `sigma_extra` yields the same
/// standard-normal draws, scaled.
pub fn add_gaussian_noise<R: Rng + ?Sized>(trace: &Trace, sigma_extra: f64, rng: &mut R) -> Result<Trace> {
    if !(sigma_extra >= 0.0 && sigma_extra.is_finite()) {
        return Err(Error::invalid(format!("added noise must be finite and >= 0, got {sigma_extra}")));
    }
    if sigma_extra == 0.0 {
        return Ok(trace.clone());
    }
    let noise = Normal::new(0.0, sigma_extra).expect("checked sigma");
    Ok(Trace {
        samples: trace.samples.iter().map(|&s| s + noise.sample(rng)).collect(),
        dt_sample: trace.dt_sample,
    })
}
