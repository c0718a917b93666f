//! Library pipeline: simulate labelled traces, calibrate, then decode fresh trials.

use qnd_core::calibration::{default_grid, optimize_readout_time, peak_signal, CalibrationResult, CalibrationSettings};
use qnd_core::experiments::SuiteConfig;
use qnd_core::hmm::{decode, Priors, QubitState, ReadoutRecord};
use qnd_core::sim::{simulate_run, RunRecord, SimConfig};

const CYCLES: usize = 15;
const TRIALS: u64 = 2000;

fn sim() -> SimConfig {
    SuiteConfig::paper_defaults().base.sim
}

fn runs(x0: QubitState, first_trial: u64, cycles: usize) -> Vec<RunRecord> {
    let cfg = sim();
    (first_trial..first_trial + TRIALS).map(|t| simulate_run(x0, cycles, &cfg, t).unwrap()).collect()
}

fn calibrate() -> CalibrationResult {
    let first = |rs: Vec<RunRecord>| rs.into_iter().map(|mut r| r.traces.swap_remove(0)).collect::<Vec<_>>();
    let traces1 = first(runs(QubitState::One, 0, 1));
    let traces0 = first(runs(QubitState::Zero, TRIALS, 1));
    let grid = default_grid(traces1[0].dt_sample, traces1[0].samples.len());
    optimize_readout_time(&traces1, &traces0, &grid, &CalibrationSettings::default()).unwrap().result
}

#[test]
fn calibrated_decoding_beats_single_shot() {
    let cal = calibrate();
    assert!(cal.eps_avg > 0.1 && cal.eps_avg < 0.4, "eps_avg {}", cal.eps_avg);

    let json = serde_json::to_string(&cal).unwrap();
    let cal: CalibrationResult = serde_json::from_str(&json).unwrap();
    let soft = cal.observation_model().unwrap();
    let hard = cal.binary_model().unwrap();
    let cfg = sim();

    let mut errors = [0u64; 2];
    for (k, x0) in [QubitState::One, QubitState::Zero].into_iter().enumerate() {
        for run in runs(x0, 10 * TRIALS + k as u64 * TRIALS, CYCLES) {
            let peaks: Vec<f64> = run.traces.iter().map(|t| peak_signal(t, cal.t_r_opt).unwrap()).collect();
            let bits: Vec<QubitState> = peaks.iter().map(|&p| cal.classify(p)).collect();

            let by_peak = decode(&ReadoutRecord::peak(cfg.dt_rep, peaks.clone()), &soft, cfg.t1_logical, Priors::default())
                .unwrap();
            let by_bit = decode(&ReadoutRecord::binary(cfg.dt_rep, bits.clone()), &hard, cfg.t1_logical, Priors::default())
                .unwrap();
            errors[0] += u64::from(by_peak.decision != x0);
            errors[1] += u64::from(by_bit.decision != x0);

            // One cycle of soft decoding is the table lookup itself.
            let first = decode(&ReadoutRecord::peak(cfg.dt_rep, peaks[..1].to_vec()), &soft, cfg.t1_logical, Priors::default())
                .unwrap();
            assert_eq!(first.decision, bits[0]);
        }
    }
    let n = 2.0 * TRIALS as f64;
    let (soft_eps, hard_eps) = (errors[0] as f64 / n, errors[1] as f64 / n);
    let stderr = (hard_eps * (1.0 - hard_eps) / n).sqrt();
    assert!(hard_eps < cal.eps_avg / 3.0, "hard {hard_eps} vs single shot {}", cal.eps_avg);
    assert!(soft_eps <= hard_eps + 2.0 * stderr, "soft {soft_eps} hard {hard_eps}");
}

#[test]
fn same_trial_index_gives_same_run() {
    let cfg = sim();
    let a = simulate_run(QubitState::One, 4, &cfg, 77).unwrap();
    let b = simulate_run(QubitState::One, 4, &cfg, 77).unwrap();
    let c = simulate_run(QubitState::One, 4, &cfg, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.traces, c.traces);
}
