//! Acceptance checks. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails. Run with `--nocapture` to see the report.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnd_core::calibration::EmpiricalDistribution;
use qnd_core::experiments::{
    fit_preparation_error, fit_t1, run_experiment, run_suite, BinaryChannel, DecodeMode, ExperimentConfig, ModeCurve,
    SuiteConfig,
};
use qnd_core::hmm::{
    brute_force_likelihood, decode, relaxation_transition, ObservationModel, Priors, QubitState, ReadoutRecord,
};
use qnd_core::sim::SimConfig;

struct Report {
    lines: Vec<String>,
    failed: usize,
}

impl Report {
    fn check(&mut self, id: &str, name: &str, pass: bool, detail: String, elapsed: Duration, budget: Duration) {
        let in_budget = elapsed <= budget;
        let ok = pass && in_budget;
        let line = format!(
            "criterion {id} [{name}]: {} ({detail}; {:.1} s of {:.0} s budget)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs_f64()
        );
        println!("{line}");
        self.lines.push(line);
        if !ok {
            self.failed += 1;
        }
    }
}

fn random_model(rng: &mut ChaCha8Rng) -> ObservationModel {
    if rng.random_bool(0.5) {
        ObservationModel::binary(rng.random_range(0.0..0.5), rng.random_range(0.0..0.5)).unwrap()
    } else {
        let bins = rng.random_range(2..=8);
        let counts = |rng: &mut ChaCha8Rng| (0..bins).map(|_| rng.random_range(0..50u64)).collect::<Vec<_>>();
        let d1 = EmpiricalDistribution::from_counts(0.0, 1.0, counts(rng), 0.5).unwrap();
        let d0 = EmpiricalDistribution::from_counts(0.0, 1.0, counts(rng), 0.5).unwrap();
        ObservationModel::empirical(d1, d0, 50.0).unwrap()
    }
}

fn random_record(rng: &mut ChaCha8Rng, model: &ObservationModel) -> ReadoutRecord {
    let n = rng.random_range(1..=10);
    let dt = 10f64.powf(rng.random_range(-4.0..-1.0));
    match model {
        ObservationModel::Binary { .. } => {
            ReadoutRecord::binary(dt, (0..n).map(|_| QubitState::from(rng.random_bool(0.5))).collect())
        }
        _ => ReadoutRecord::peak(dt, (0..n).map(|_| rng.random_range(-0.1..1.1)).collect()),
    }
}

fn criterion_1(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let model = random_model(&mut rng);
        let record = random_record(&mut rng, &model);
        let t1 = if rng.random_bool(0.3) { f64::INFINITY } else { 10f64.powf(rng.random_range(-3.0..1.0)) };
        let r = decode(&record, &model, t1, Priors::default()).unwrap();
        let last = r.belief_trajectory.last().unwrap();
        for (k, x0) in [QubitState::One, QubitState::Zero].into_iter().enumerate() {
            let oracle = brute_force_likelihood(&record, &model, t1, x0).unwrap();
            let filter = last[k].log_likelihood.exp();
            worst = worst.max(((filter - oracle) / oracle).abs());
        }
    }
    report.check(
        "1",
        "filter-oracle equivalence",
        worst <= 1e-10,
        format!("max relative error {worst:.2e} over 1000 records, tolerance 1e-10"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

fn binomial_tail(n: usize, eps: f64) -> f64 {
    let choose = |n: usize, k: usize| (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64);
    ((n + 1) / 2..=n).map(|k| choose(n, k) * eps.powi(k as i32) * (1.0 - eps).powi((n - k) as i32)).sum()
}

/// Exact logical error of hard decoding by enumerating all outcome strings.
fn enumerated_error(n: usize, eps: f64, prepared: QubitState) -> f64 {
    let model = ObservationModel::binary(eps, eps).unwrap();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let bits: Vec<QubitState> = (0..n).map(|k| QubitState::from(mask >> k & 1 == 1)).collect();
        let flips = bits.iter().filter(|&&b| b != prepared).count();
        let p = eps.powi(flips as i32) * (1.0 - eps).powi((n - flips) as i32);
        let r = decode(&ReadoutRecord::binary(0.003263, bits), &model, f64::INFINITY, Priors::default()).unwrap();
        if r.decision != prepared {
            total += p;
        }
    }
    total
}

fn criterion_2(report: &mut Report) {
    let start = Instant::now();
    let eps = 0.25;
    let exact3 = enumerated_error(3, eps, QubitState::One);
    let mut worst_tail = 0.0f64;
    for n in (1..=11).step_by(2) {
        for state in [QubitState::One, QubitState::Zero] {
            worst_tail = worst_tail.max((enumerated_error(n, eps, state) - binomial_tail(n, eps)).abs());
        }
    }
    let trials = 10_000;
    let cfg = ExperimentConfig {
        sim: SimConfig { t1_logical: f64::INFINITY, ..SimConfig::default() },
        n_trials_per_state: trials,
        max_cycles: 10,
        decode_modes: vec![DecodeMode::Hard],
        binary_channel: Some(BinaryChannel { eps1: eps, eps0: eps }),
        ..ExperimentConfig::default()
    };
    let curve = run_experiment(&cfg).unwrap().curve;
    let hard = curve.mode(DecodeMode::Hard).unwrap();
    let mut worst_z = 0.0f64;
    for n in 1..=10 {
        let p = hard.at(n).unwrap();
        for (measured, state) in [(p.eps1, QubitState::One), (p.eps0, QubitState::Zero)] {
            let exact = enumerated_error(n, eps, state);
            let se = (exact * (1.0 - exact) / trials as f64).sqrt();
            worst_z = worst_z.max((measured - exact).abs() / se);
        }
    }
    report.check(
        "2",
        "majority-vote closed form",
        (exact3 - 0.15625).abs() < 1e-15 && worst_tail < 1e-12 && worst_z <= 3.0,
        format!(
            "enumerated eps(3) = {exact3}, max |enumeration - binomial tail| over odd N <= 11 = {worst_tail:.1e}, \
             Monte Carlo vs enumeration for N <= 10: max |z| = {worst_z:.2} <= 3"
        ),
        start.elapsed(),
        Duration::from_secs(30),
    );
}

fn criterion_3(report: &mut Report) {
    let start = Instant::now();
    let (dt, t1) = (3.263e-3, 1.8);
    let w = relaxation_transition(dt, t1).unwrap();
    let x: f64 = dt / t1;
    let mut series = 0.0;
    let mut term = 1.0;
    for k in 0..25 {
        series += term;
        term *= -x / (k + 1) as f64;
    }
    let survive = w.get(QubitState::One.index(), QubitState::One.index());
    let series_ok = (survive - series).abs() <= 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_semigroup, mut worst_column) = (0.0f64, 0.0f64);
    let mut in_range = true;
    for _ in 0..100_000 {
        let t1 = 10f64.powf(rng.random_range(-4.0..2.0));
        let a = 10f64.powf(rng.random_range(-6.0..0.0));
        let b = 10f64.powf(rng.random_range(-6.0..0.0));
        let (wa, wb, wab) = (
            relaxation_transition(a, t1).unwrap(),
            relaxation_transition(b, t1).unwrap(),
            relaxation_transition(a + b, t1).unwrap(),
        );
        let composed = wb.compose(&wa).as_array();
        let direct = wab.as_array();
        for i in 0..2 {
            for j in 0..2 {
                worst_semigroup = worst_semigroup.max((composed[i][j] - direct[i][j]).abs());
                in_range &= (0.0..=1.0).contains(&direct[i][j]);
            }
        }
        for j in 0..2 {
            worst_column = worst_column.max((direct[0][j] + direct[1][j] - 1.0).abs());
        }
    }
    report.check(
        "3",
        "relaxation matrix",
        series_ok && worst_semigroup <= 1e-12 && worst_column <= 1e-12 && in_range,
        format!(
            "survival {survive:.9} vs series {series:.9} (|diff| {:.1e}), max semigroup error {worst_semigroup:.1e}, \
             max column-sum error {worst_column:.1e} over 1e5 draws",
            (survive - series).abs()
        ),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn fidelity(curve: &ModeCurve, n: usize) -> f64 {
    curve.at(n).unwrap().fidelity
}

fn criteria_4_to_7(report: &mut Report) {
    let start = Instant::now();
    let cfg = SuiteConfig::paper_defaults();
    let out = run_suite(&cfg).unwrap();
    let suite_time = start.elapsed();

    let cal = &out.fits.calibration_ideal;
    let hard_prepared = out.prepared.curve.mode(DecodeMode::Hard).unwrap();
    let hard_ideal = out.ideal.curve.mode(DecodeMode::Hard).unwrap();
    let (f15_eta, f15, f30) = (fidelity(hard_prepared, 15), fidelity(hard_ideal, 15), fidelity(hard_ideal, 30));
    let cal_ok = (cal.eps1 - 0.329).abs() <= 0.02 && (cal.eps0 - 0.162).abs() <= 0.02;
    report.check(
        "4",
        "matched hard decoding",
        cal_ok && (0.93..=0.96).contains(&f15_eta) && (0.965..=0.99).contains(&f15) && f30 > 0.99,
        format!(
            "calibrated eps1 = {:.4}, eps0 = {:.4} (targets 0.329 / 0.162 +- 0.02); F(15) with preparation error = {:.4} \
             in [0.93, 0.96]; F(15) without = {:.4} in [0.965, 0.99]; F(30) without = {:.4} > 0.99",
            cal.eps1, cal.eps0, f15_eta, f15, f30
        ),
        suite_time,
        Duration::from_secs(600),
    );

    let noise = &out.fits.noise;
    let hard_noisy = out.noisy.curve.mode(DecodeMode::Hard).unwrap();
    let soft_noisy = out.noisy.curve.mode(DecodeMode::Soft).unwrap();
    let target = hard_noisy.at(15).unwrap().eps_avg;
    let n_soft = soft_noisy.points.iter().find(|p| p.eps_avg <= target).map(|p| p.n);
    let avg_ok = (noise.calibration.eps_avg - 0.417).abs() <= 0.015;
    report.check(
        "5",
        "soft-decoding advantage at low SNR",
        avg_ok && n_soft.is_some_and(|n| (8..=12).contains(&n)),
        format!(
            "added sigma = {:.4}, calibrated eps avg = {:.4} (target 0.417 +- 0.015); per state eps1 = {:.4}, eps0 = {:.4}, \
             off the 0.411 / 0.423 split since one noise scale only sets the average; \
             hard eps(15) = {target:.4}, soft reaches it at N = {n_soft:?}, required 10 +- 2",
            noise.sigma, noise.calibration.eps_avg, noise.calibration.eps1, noise.calibration.eps0
        ),
        suite_time,
        Duration::from_secs(900),
    );

    // The criterion is on the averaged logical error. Per-state rates move against each other
    // wherever the hard decoder's lattice of log-odds sits on the decision boundary, so they
    // are printed for reference only.
    let soft_ideal = out.ideal.curve.mode(DecodeMode::Soft).unwrap();
    let (mut worst_z, mut worst_state_gap) = (0.0f64, 0.0f64);
    for n in 1..=15 {
        let (s, h) = (soft_ideal.at(n).unwrap(), hard_ideal.at(n).unwrap());
        let se = s.stderr_avg.max(h.stderr_avg);
        worst_z = worst_z.max((s.eps_avg - h.eps_avg).abs() / se);
        worst_state_gap = worst_state_gap.max((s.eps1 - h.eps1).abs()).max((s.eps0 - h.eps0).abs());
    }
    report.check(
        "6",
        "bimodal-regime equivalence",
        worst_z <= 3.0,
        format!(
            "max |eps_soft - eps_hard| / stderr = {worst_z:.2} <= 3 over N <= 15 (stderr = larger of the two); \
             largest per-state gap {worst_state_gap:.4}"
        ),
        suite_time,
        Duration::from_secs(600),
    );

    let fit_start = Instant::now();
    let times: Vec<f64> = (0..15).map(|k| k as f64 * 3.263e-3).collect();
    let exact1: Vec<f64> = times.iter().map(|t| 0.5 * (-t / 1.8f64).exp() + 0.25).collect();
    let exact = fit_t1(&times, &exact1, &[0.25; 15]).unwrap();
    let exact_err = ["A", "B", "T1"]
        .iter()
        .zip([0.5, 0.25, 1.8])
        .map(|(name, truth)| (exact.value(name).unwrap() - truth).abs())
        .fold(0.0f64, f64::max);

    // Binomial noise at 1e4 shots per point: the quoted standard error should cover the truth
    // about as often as a normal error bar does.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws = 400;
    let (mut within1, mut within2) = (0, 0);
    let binomial = |p: f64, rng: &mut ChaCha8Rng| (0..10_000).filter(|_| rng.random_bool(p)).count() as f64 / 1e4;
    for _ in 0..draws {
        let p1: Vec<f64> = exact1.iter().map(|&p| binomial(p, &mut rng)).collect();
        let p0: Vec<f64> = (0..15).map(|_| binomial(0.25, &mut rng)).collect();
        let fit = fit_t1(&times, &p1, &p0).unwrap();
        let t1 = fit.get("T1").unwrap();
        let z = (t1.value - 1.8).abs() / t1.stderr.unwrap();
        within1 += usize::from(z <= 1.0);
        within2 += usize::from(z <= 2.0);
    }
    let (cover1, cover2) = (within1 as f64 / draws as f64, within2 as f64 / draws as f64);
    // Nominal one-sigma coverage less three Monte Carlo standard deviations.
    let nominal = 0.6827;
    let coverage_ok = cover1 >= nominal - 3.0 * (nominal * (1.0 - nominal) / draws as f64).sqrt();

    let single = fit_preparation_error(&[0.055], &[0.02]).unwrap().value("eta").unwrap();
    let pf = &out.fits.preparation_error;
    let (eta1, eta0) = (pf.state1.value("eta").unwrap(), pf.state0.value("eta").unwrap());
    let eta_ok = (eta1 - 0.04).abs() <= 0.005 && (eta0 - 0.0044).abs() <= 0.005 && (pf.average - 0.0222).abs() <= 0.005;
    report.check(
        "7",
        "fit round trips",
        exact_err <= 1e-6 && coverage_ok && (single - 0.035 / 0.96).abs() < 1e-12 && eta_ok,
        format!(
            "exact-data max parameter error {exact_err:.1e} <= 1e-6; binomial-noise T1 coverage {:.0}% within 1 stderr \
             (nominal 68%), {:.0}% within 2 over {draws} draws; single-point eta = {single:.5}; \
             suite eta1 = {eta1:.4}, eta0 = {eta0:.4} (+- 0.005), average = {:.4} (0.022)",
            100.0 * cover1,
            100.0 * cover2,
            pf.average
        ),
        fit_start.elapsed(),
        Duration::from_secs(60),
    );
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_8(report: &mut Report) {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let qnd = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_qnd")).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let first = dir.path().join("seed");
    let first_s = first.to_string_lossy().into_owned();
    qnd(&["benchmark", "--suite", "paper-defaults", "--out-dir", &first_s]);
    let manifest = first.join("manifest.json").to_string_lossy().into_owned();
    let reference = dir_contents(&first);
    let mut identical = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = dir.path().join(format!("threads{threads}"));
        qnd(&["--threads", threads, "benchmark", "--from-manifest", &manifest, "--out-dir", &out.to_string_lossy()]);
        identical.push((threads, dir_contents(&out) == reference));
    }
    report.check(
        "8",
        "determinism",
        identical.iter().all(|(_, same)| *same),
        format!(
            "{} files rerun from the manifest; byte-identical per thread count: {:?}",
            reference.len(),
            identical
        ),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new(), failed: 0 };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criteria_4_to_7(&mut report);
    criterion_8(&mut report);
    assert_eq!(report.failed, 0, "failed criteria:\n{}", report.lines.join("\n"));
}
