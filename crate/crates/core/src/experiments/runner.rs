use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{per_cycle_probabilities, CurvePoint, ErrorCurve, ModeCurve, PerCycleRow};
use super::{DecodeMode, ExperimentConfig};
use crate::calibration::{default_grid, optimize_from_prefix_maxima, samples_within, Calibration, CalibrationResult};
use crate::error::{Error, Result};
use crate::hmm::{decode, majority_vote, ObservationModel, Priors, QubitState, ReadoutRecord};
use crate::seed::{derive, stream, Domain};
use crate::sim::{add_gaussian_noise, simulate_cycles, simulate_states, SimConfig, Trace};

/// Labels for the derived seeds of each trace set.
const CALIBRATION_SET: u64 = 10;
const EVALUATION_SET: u64 = 20;

fn set_seed(master: u64, set: u64, prepared: QubitState) -> u64 {
    derive(master, set + u8::from(prepared) as u64)
}

fn seeded(sim: &SimConfig, seed: u64) -> SimConfig {
    SimConfig {
        master_seed: seed,
        ..sim.clone()
    }
}

/// Start state of an evaluation trial after the preparation flip.
fn actual_start(seed: u64, prepared: QubitState, eta: f64, trial: u64) -> QubitState {
    let u: f64 = stream(seed, Domain::Preparation, trial, 0).random();
    if u < eta {
        prepared.flipped()
    } else {
        prepared
    }
}

fn eta_for(cfg: &ExperimentConfig, prepared: QubitState) -> f64 {
    match prepared {
        QubitState::One => cfg.prep_error_eta1,
        QubitState::Zero => cfg.prep_error_eta0,
    }
}

/// Simulates one trial and hands each cycle's trace, with added noise, to `visit`.
fn noisy_cycles<F: FnMut(usize, Trace)>(
    sim: &SimConfig,
    x0: QubitState,
    n_cycles: usize,
    sigma_add: f64,
    trial: u64,
    mut visit: F,
) -> Result<()> {
    let mut failure = None;
    simulate_cycles(x0, n_cycles, sim, trial, |cycle, _, _, trace| {
        let mut rng = stream(sim.master_seed, Domain::AddedNoise, trial, cycle as u64);
        match add_gaussian_noise(&trace, sigma_add, &mut rng) {
            Ok(noisy) => visit(cycle, noisy),
            Err(e) => failure = Some(e),
        }
    })?;
    failure.map_or(Ok(()), Err)
}

fn first_cycle_maxima(sim: &SimConfig, starts: &[QubitState], sigma_add: f64) -> Result<Vec<Vec<f64>>> {
    starts
        .par_iter()
        .enumerate()
        .map(|(trial, &x0)| {
            let mut maxima = Vec::new();
            noisy_cycles(sim, x0, 1, sigma_add, trial as u64, |_, t| maxima = t.prefix_max())?;
            Ok(maxima)
        })
        .collect()
}

/// Chooses the readout time and histograms for `cfg` with `sigma_add` extra noise.
///
/// Uses an independent perfectly prepared set unless `calibration_fraction`
/// selects first-cycle traces of the evaluation trials.
pub fn calibrate_experiment(cfg: &ExperimentConfig, sigma_add: f64) -> Result<Calibration> {
    let master = cfg.sim.master_seed;
    let mut maxima = Vec::with_capacity(2);
    for prepared in [QubitState::One, QubitState::Zero] {
        let set = match cfg.calibration_fraction {
            None => {
                let sim = seeded(&cfg.sim, set_seed(master, CALIBRATION_SET, prepared));
                first_cycle_maxima(&sim, &vec![prepared; cfg.n_trials_per_state], sigma_add)?
            }
            Some(f) => {
                let seed = set_seed(master, EVALUATION_SET, prepared);
                let count = ((f * cfg.n_trials_per_state as f64).ceil() as usize).max(1);
                let eta = eta_for(cfg, prepared);
                let starts: Vec<QubitState> =
                    (0..count as u64).map(|t| actual_start(seed, prepared, eta, t)).collect();
                first_cycle_maxima(&seeded(&cfg.sim, seed), &starts, sigma_add)?
            }
        };
        maxima.push(set);
    }
    let grid = match &cfg.t_r_grid {
        Some(g) => g.clone(),
        None => default_grid(cfg.sim.dt_sample, cfg.sim.n_samples()),
    };
    optimize_from_prefix_maxima(&maxima[0], &maxima[1], cfg.sim.dt_sample, &grid, &cfg.calibration)
}

/// Per-trial readings: thresholded bits and, with traces, peak signals.
struct TrialReadout {
    bits: Vec<QubitState>,
    peaks: Option<Vec<f64>>,
}

fn evaluation_readouts(
    cfg: &ExperimentConfig,
    prepared: QubitState,
    calibration: Option<&CalibrationResult>,
    sigma_add: f64,
) -> Result<Vec<TrialReadout>> {
    let seed = set_seed(cfg.sim.master_seed, EVALUATION_SET, prepared);
    let sim = seeded(&cfg.sim, seed);
    let eta = eta_for(cfg, prepared);
    let n_cycles = cfg.max_cycles;
    (0..cfg.n_trials_per_state as u64)
        .into_par_iter()
        .map(|trial| {
            let x0 = actual_start(seed, prepared, eta, trial);
            if let Some(channel) = &cfg.binary_channel {
                let (hidden, _) = simulate_states(x0, n_cycles, &sim, trial)?;
                let bits = hidden
                    .iter()
                    .enumerate()
                    .map(|(cycle, &h)| {
                        let flip = if h.is_one() { channel.eps1 } else { channel.eps0 };
                        let u: f64 = stream(seed, Domain::BinaryChannel, trial, cycle as u64).random();
                        if u < flip {
                            h.flipped()
                        } else {
                            h
                        }
                    })
                    .collect();
                return Ok(TrialReadout { bits, peaks: None });
            }
            let cal = calibration.ok_or_else(|| Error::invalid("trace readout needs a calibration"))?;
            let n_r = samples_within(cal.t_r_opt, sim.dt_sample)?;
            let mut peaks = Vec::with_capacity(n_cycles);
            noisy_cycles(&sim, x0, n_cycles, sigma_add, trial, |_, t| {
                peaks.push(t.samples[..n_r].iter().copied().fold(f64::NEG_INFINITY, f64::max))
            })?;
            let bits = peaks.iter().map(|&p| cal.classify(p)).collect();
            Ok(TrialReadout { bits, peaks: Some(peaks) })
        })
        .collect()
}

/// Decisions after `1..=N` cycles for one trial.
fn prefix_decisions(
    mode: DecodeMode,
    readout: &TrialReadout,
    hard: Option<&ObservationModel>,
    soft: Option<&ObservationModel>,
    dt_rep: f64,
    t1: f64,
) -> Result<Vec<QubitState>> {
    let from_lambda = |record: ReadoutRecord, model: &ObservationModel| -> Result<Vec<QubitState>> {
        let r = decode(&record, model, t1, Priors::default())?;
        Ok(r.per_cycle_lambda.iter().map(|&l| QubitState::from(l > 0.0)).collect())
    };
    match mode {
        DecodeMode::Hard => from_lambda(
            ReadoutRecord::binary(dt_rep, readout.bits.clone()),
            hard.ok_or_else(|| Error::invalid("hard decoding needs a binary model"))?,
        ),
        DecodeMode::Soft => from_lambda(
            ReadoutRecord::peak(
                dt_rep,
                readout
                    .peaks
                    .clone()
                    .ok_or_else(|| Error::invalid("soft decoding needs peak signals"))?,
            ),
            soft.ok_or_else(|| Error::invalid("soft decoding needs an empirical model"))?,
        ),
        DecodeMode::Majority => (1..=readout.bits.len())
            .map(|n| majority_vote(&readout.bits[..n]))
            .collect(),
    }
}

/// Calibration summary carried with experiment outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSummary {
    pub t_r_opt: f64,
    pub eps1: f64,
    pub eps0: f64,
    pub eps_avg: f64,
    pub stderr1: f64,
    pub stderr0: f64,
}

impl From<&CalibrationResult> for CalibrationSummary {
    fn from(r: &CalibrationResult) -> Self {
        CalibrationSummary {
            t_r_opt: r.t_r_opt,
            eps1: r.eps1,
            eps0: r.eps0,
            eps_avg: r.eps_avg,
            stderr1: r.stderr1,
            stderr0: r.stderr0,
        }
    }
}

/// Everything produced by one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub curve: ErrorCurve,
    /// Absent with a fixed binary channel.
    pub calibration: Option<Calibration>,
    /// Single-repetition and cumulative spin-up probabilities; cumulative
    /// decisions come from the first available of hard, majority, soft.
    pub per_cycle: Vec<PerCycleRow>,
}

pub fn run_error_curve(cfg: &ExperimentConfig) -> Result<ErrorCurve> {
    Ok(run_experiment(cfg)?.curve)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let calibration = match cfg.binary_channel {
        Some(_) => None,
        None => Some(calibrate_experiment(cfg, cfg.added_noise_sigma)?),
    };
    evaluate(cfg, calibration)
}

/// Evaluates `cfg` against a given calibration (`None` only with a binary channel).
pub fn evaluate(cfg: &ExperimentConfig, calibration: Option<Calibration>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let cal_result = calibration.as_ref().map(|c| &c.result);
    let hard = match (&cfg.binary_channel, cal_result) {
        (Some(ch), _) => Some(ch.model()?),
        (None, Some(r)) => Some(r.binary_model()?),
        (None, None) => return Err(Error::invalid("trace readout needs a calibration")),
    };
    let soft = match cal_result {
        Some(r) if cfg.decode_modes.contains(&DecodeMode::Soft) => Some(r.observation_model()?),
        _ => None,
    };
    let mut modes = cfg.decode_modes.clone();
    modes.sort();
    modes.dedup();

    let t1 = cfg.sim.t1_logical;
    let dt_rep = cfg.sim.dt_rep;
    let mut bits = Vec::with_capacity(2);
    let mut decisions = Vec::with_capacity(2);
    for prepared in [QubitState::One, QubitState::Zero] {
        let readouts = evaluation_readouts(cfg, prepared, cal_result, cfg.added_noise_sigma)?;
        let per_trial: Vec<Vec<Vec<QubitState>>> = readouts
            .par_iter()
            .map(|r| {
                modes
                    .iter()
                    .map(|&m| prefix_decisions(m, r, hard.as_ref(), soft.as_ref(), dt_rep, t1))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        bits.push(readouts.into_iter().map(|r| r.bits).collect::<Vec<_>>());
        decisions.push(per_trial);
    }

    let trials = cfg.n_trials_per_state as u64;
    let mut curves = Vec::with_capacity(modes.len());
    for (mi, &mode) in modes.iter().enumerate() {
        let points = (0..cfg.max_cycles)
            .map(|k| {
                let errors1 = decisions[0].iter().filter(|d| !d[mi][k].is_one()).count() as u64;
                let errors0 = decisions[1].iter().filter(|d| d[mi][k].is_one()).count() as u64;
                CurvePoint::from_counts(k + 1, errors1, trials, errors0, trials)
            })
            .collect::<Result<Vec<_>>>()?;
        curves.push(ModeCurve { mode, points });
    }

    let cumulative_mode = [DecodeMode::Hard, DecodeMode::Majority, DecodeMode::Soft]
        .into_iter()
        .find_map(|m| modes.iter().position(|&x| x == m))
        .expect("at least one mode");
    let cumulative = |state: usize| -> Vec<Vec<QubitState>> {
        decisions[state].iter().map(|d| d[cumulative_mode].clone()).collect()
    };
    let per_cycle = per_cycle_probabilities(&bits[0], &bits[1], &cumulative(0), &cumulative(1), dt_rep)?;

    Ok(ExperimentOutput {
        curve: ErrorCurve {
            n_trials_per_state: cfg.n_trials_per_state,
            curves,
        },
        calibration,
        per_cycle,
    })
}

/// Added-noise level whose calibration reaches a target average error.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTuning {
    pub sigma: f64,
    pub calibration: Calibration,
    pub evaluations: usize,
}

/// Bisects the added-noise standard deviation until the calibrated average
/// single-repetition error matches `target_eps_avg`.
///
/// Every trial reuses its standard-normal draws at each noise level, so the
/// objective varies smoothly with sigma.
pub fn tune_added_noise(cfg: &ExperimentConfig, target_eps_avg: f64) -> Result<NoiseTuning> {
    cfg.validate()?;
    if cfg.binary_channel.is_some() {
        return Err(Error::invalid("added noise needs trace readout"));
    }
    if !(target_eps_avg > 0.0 && target_eps_avg < 0.5) {
        return Err(Error::invalid(format!("target error must lie in (0, 0.5), got {target_eps_avg}")));
    }
    let mut evaluations = 0;
    let mut eval = |sigma: f64| -> Result<Calibration> {
        evaluations += 1;
        calibrate_experiment(cfg, sigma)
    };

    let base = eval(0.0)?;
    if base.result.eps_avg >= target_eps_avg {
        return Ok(NoiseTuning {
            sigma: 0.0,
            calibration: base,
            evaluations,
        });
    }
    let (mut lo, mut lo_cal) = (0.0, base);
    let mut hi = 0.25;
    let mut hi_cal = eval(hi)?;
    while hi_cal.result.eps_avg < target_eps_avg {
        if hi > 1e3 {
            return Err(Error::Numerical(format!(
                "added noise up to {hi} does not reach average error {target_eps_avg}"
            )));
        }
        lo = hi;
        lo_cal = hi_cal;
        hi *= 2.0;
        hi_cal = eval(hi)?;
    }
    for _ in 0..40 {
        if hi - lo <= 1e-4 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let cal = eval(mid)?;
        if cal.result.eps_avg < target_eps_avg {
            lo = mid;
            lo_cal = cal;
        } else {
            hi = mid;
            hi_cal = cal;
        }
    }
    let (sigma, calibration) = if (lo_cal.result.eps_avg - target_eps_avg).abs() <= (hi_cal.result.eps_avg - target_eps_avg).abs() {
        (lo, lo_cal)
    } else {
        (hi, hi_cal)
    };
    Ok(NoiseTuning {
        sigma,
        calibration,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::BinaryChannel;

    fn small(cfg: ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            n_trials_per_state: 400,
            ..cfg
        }
    }

    #[test]
    fn perfect_channel_never_errs() {
        let cfg = small(ExperimentConfig {
            sim: SimConfig {
                t1_logical: f64::INFINITY,
                t1_ancilla: f64::INFINITY,
                sigma_noise: 0.0,
                // Instant tunnelling out and no refill leave nothing to miss.
                gamma_out: f64::INFINITY,
                gamma_in: 0.0,
                ..SimConfig::default()
            },
            max_cycles: 6,
            ..Default::default()
        });
        let out = run_experiment(&cfg).unwrap();
        for c in &out.curve.curves {
            assert!(c.points.iter().all(|p| p.eps1 == 0.0 && p.eps0 == 0.0), "{:?}", c.mode);
        }
        assert!(out.per_cycle.iter().all(|r| r.single_prep1 == 1.0 && r.cumulative_prep0 == 0.0));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = small(ExperimentConfig {
            sim: SimConfig { gamma_dark: 100.0, p_crot_flip: 0.1, ..SimConfig::default() },
            max_cycles: 4,
            prep_error_eta1: 0.05,
            ..Default::default()
        });
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_experiment(&cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn calibration_fraction_uses_evaluation_trials() {
        let cfg = small(ExperimentConfig {
            calibration_fraction: Some(0.5),
            max_cycles: 2,
            ..Default::default()
        });
        let out = run_experiment(&cfg).unwrap();
        assert!(out.calibration.is_some());
    }

    #[test]
    fn binary_channel_mode() {
        let cfg = small(ExperimentConfig {
            sim: SimConfig { t1_logical: f64::INFINITY, ..SimConfig::default() },
            max_cycles: 3,
            decode_modes: vec![DecodeMode::Hard, DecodeMode::Majority],
            binary_channel: Some(BinaryChannel { eps1: 0.0, eps0: 0.0 }),
            ..Default::default()
        });
        let out = run_experiment(&cfg).unwrap();
        assert!(out.calibration.is_none());
        assert_eq!(out.curve.curves.len(), 2);
        assert!(out.curve.curves.iter().all(|c| c.points.iter().all(|p| p.eps_avg == 0.0)));
    }
}
