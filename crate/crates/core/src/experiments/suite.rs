//! The standard study: three coupled runs sharing evaluation seeds.
//!
//! * `prepared`: preparation errors applied, no added noise.
//! * `ideal`: perfect preparation, extended to more cycles.
//! * `noisy`: like `prepared` with added noise tuned to a low-SNR target.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curve::{ErrorCurve, PerCycleRow, TidyRow};
use super::fit::{fit_preparation_error, fit_t1, FitResult};
use super::runner::{evaluate, run_experiment, tune_added_noise, CalibrationSummary, ExperimentOutput};
use super::{DecodeMode, ExperimentConfig};
use crate::calibration::{CalibrationResult, SweepPoint};
use crate::error::{Error, Result};
use crate::sim::SimConfig;
use crate::table::write_csv;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Shared settings; its preparation errors and added noise are overridden per run.
    pub base: ExperimentConfig,
    pub prep_error_eta1: f64,
    pub prep_error_eta0: f64,
    /// Cycles of the perfectly prepared run.
    pub extended_cycles: usize,
    /// Calibrated average single-repetition error the added noise is tuned to.
    pub noisy_target_eps_avg: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            base: ExperimentConfig::default(),
            prep_error_eta1: 0.0,
            prep_error_eta0: 0.0,
            extended_cycles: 30,
            noisy_target_eps_avg: 0.417,
        }
    }
}

impl SuiteConfig {
    /// Device regime whose calibration lands near 33% / 16% single-repetition
    /// errors, with 4% / 0.44% preparation errors.
    pub fn paper_defaults() -> Self {
        SuiteConfig {
            base: ExperimentConfig {
                sim: SimConfig {
                    t1_logical: 1.8,
                    t1_ancilla: 0.95e-3,
                    gamma_out: 5e3,
                    gamma_in: 5e3,
                    gamma_dark: 70.0,
                    p_crot_flip: 0.10,
                    p_ancilla_init: 0.06,
                    sigma_noise: 0.15,
                    ..SimConfig::default()
                },
                n_trials_per_state: 10_000,
                max_cycles: 15,
                ..ExperimentConfig::default()
            },
            prep_error_eta1: 0.04,
            prep_error_eta0: 0.0044,
            extended_cycles: 30,
            noisy_target_eps_avg: 0.417,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prepared().validate()?;
        self.ideal().validate()?;
        if self.base.binary_channel.is_some() {
            return Err(Error::invalid("the suite needs trace readout"));
        }
        if !(self.noisy_target_eps_avg > 0.0 && self.noisy_target_eps_avg < 0.5) {
            return Err(Error::invalid("noisy_target_eps_avg must lie in (0, 0.5)"));
        }
        Ok(())
    }

    pub fn prepared(&self) -> ExperimentConfig {
        ExperimentConfig {
            prep_error_eta1: self.prep_error_eta1,
            prep_error_eta0: self.prep_error_eta0,
            added_noise_sigma: 0.0,
            ..self.base.clone()
        }
    }

    pub fn ideal(&self) -> ExperimentConfig {
        ExperimentConfig {
            prep_error_eta1: 0.0,
            prep_error_eta0: 0.0,
            added_noise_sigma: 0.0,
            max_cycles: self.extended_cycles.max(self.base.max_cycles),
            ..self.base.clone()
        }
    }
}

/// Preparation error per prepared state, from hard-decoded curves of the
/// prepared run against the ideal run over the common cycle range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparationFit {
    pub state1: FitResult,
    pub state0: FitResult,
    pub average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub sigma: f64,
    pub target_eps_avg: f64,
    pub calibration: CalibrationSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteFits {
    /// Joint exponential fit of single-repetition spin-up probabilities of the prepared run.
    pub t1: FitResult,
    pub preparation_error: PreparationFit,
    pub noise: NoiseSummary,
    pub calibration_prepared: CalibrationSummary,
    pub calibration_ideal: CalibrationSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub prepared: ExperimentOutput,
    pub ideal: ExperimentOutput,
    pub noisy: ExperimentOutput,
    pub fits: SuiteFits,
}

fn calibration_of(out: &ExperimentOutput) -> Result<&CalibrationResult> {
    out.calibration
        .as_ref()
        .map(|c| &c.result)
        .ok_or_else(|| Error::invalid("suite runs need a calibration"))
}

fn hard_curve(curve: &ErrorCurve) -> Result<&super::ModeCurve> {
    curve
        .mode(DecodeMode::Hard)
        .ok_or_else(|| Error::invalid("the suite needs the hard decode mode"))
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    cfg.validate()?;
    let prepared_cfg = cfg.prepared();
    let prepared = run_experiment(&prepared_cfg)?;
    let ideal = run_experiment(&cfg.ideal())?;

    let tuning = tune_added_noise(&prepared_cfg, cfg.noisy_target_eps_avg)?;
    let noisy_cfg = ExperimentConfig {
        added_noise_sigma: tuning.sigma,
        ..prepared_cfg.clone()
    };
    let noise = NoiseSummary {
        sigma: tuning.sigma,
        target_eps_avg: cfg.noisy_target_eps_avg,
        calibration: CalibrationSummary::from(&tuning.calibration.result),
    };
    let noisy = evaluate(&noisy_cfg, Some(tuning.calibration))?;

    let times: Vec<f64> = prepared.per_cycle.iter().map(|r| r.time_s).collect();
    let p1: Vec<f64> = prepared.per_cycle.iter().map(|r| r.single_prep1).collect();
    let p0: Vec<f64> = prepared.per_cycle.iter().map(|r| r.single_prep0).collect();
    let t1 = fit_t1(&times, &p1, &p0)?;

    let exp = hard_curve(&prepared.curve)?;
    let sim = hard_curve(&ideal.curve)?;
    let n = exp.points.len().min(sim.points.len());
    let pick = |c: &super::ModeCurve, one: bool| -> Vec<f64> {
        c.points[..n].iter().map(|p| if one { p.eps1 } else { p.eps0 }).collect()
    };
    let state1 = fit_preparation_error(&pick(exp, true), &pick(sim, true))?;
    let state0 = fit_preparation_error(&pick(exp, false), &pick(sim, false))?;
    let average = (state1.parameters[0].value + state0.parameters[0].value) / 2.0;

    let fits = SuiteFits {
        t1,
        preparation_error: PreparationFit { state1, state0, average },
        noise,
        calibration_prepared: CalibrationSummary::from(calibration_of(&prepared)?),
        calibration_ideal: CalibrationSummary::from(calibration_of(&ideal)?),
    };
    Ok(SuiteOutput {
        prepared,
        ideal,
        noisy,
        fits,
    })
}

/// Everything needed to rerun a suite bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub crate_name: String,
    pub crate_version: String,
    pub master_seed: u64,
    pub config: SuiteConfig,
    pub files: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
struct RunTidyRow<'a> {
    run: &'a str,
    mode: DecodeMode,
    prepared_state: String,
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    stderr: f64,
}

impl<'a> RunTidyRow<'a> {
    fn new(run: &'a str, row: TidyRow) -> Self {
        RunTidyRow {
            run,
            mode: row.mode,
            prepared_state: row.prepared_state,
            n: row.n,
            eps: row.eps,
            stderr: row.stderr,
        }
    }
}

#[derive(Serialize)]
struct SweepRow {
    run: &'static str,
    t_r: f64,
    eps1: f64,
    eps0: f64,
    eps_avg: f64,
}

#[derive(Serialize)]
struct CompositionRow {
    prepared_state: &'static str,
    #[serde(rename = "N")]
    n: usize,
    eps_experiment: f64,
    stderr_experiment: f64,
    eps_simulated: f64,
    stderr_simulated: f64,
    eta: f64,
    eps_composed: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn sweep_rows<'a>(run: &'static str, sweep: &'a [SweepPoint]) -> impl Iterator<Item = SweepRow> + 'a {
    sweep.iter().map(move |p| SweepRow {
        run,
        t_r: p.t_r,
        eps1: p.eps1,
        eps0: p.eps0,
        eps_avg: p.eps_avg,
    })
}

fn composition_rows(out: &SuiteOutput) -> Result<Vec<CompositionRow>> {
    let exp = hard_curve(&out.prepared.curve)?;
    let sim = hard_curve(&out.ideal.curve)?;
    let fit = &out.fits.preparation_error;
    let mut rows = Vec::new();
    for (label, one, eta) in [
        ("1", true, fit.state1.parameters[0].value),
        ("0", false, fit.state0.parameters[0].value),
    ] {
        for (e, s) in exp.points.iter().zip(&sim.points) {
            let (eps_experiment, stderr_experiment, eps_simulated, stderr_simulated) = if one {
                (e.eps1, e.stderr1, s.eps1, s.stderr1)
            } else {
                (e.eps0, e.stderr0, s.eps0, s.stderr0)
            };
            rows.push(CompositionRow {
                prepared_state: label,
                n: e.n,
                eps_experiment,
                stderr_experiment,
                eps_simulated,
                stderr_simulated,
                eta,
                eps_composed: (1.0 - 2.0 * eta) * eps_simulated + eta,
            });
        }
    }
    Ok(rows)
}

/// Writes figure datasets, curves, fits and the manifest into `dir`, which must exist.
///
/// With `plot_data_only` the JSON summaries other than the manifest are skipped.
pub fn write_suite(dir: &Path, cfg: &SuiteConfig, out: &SuiteOutput, plot_data_only: bool) -> Result<Vec<String>> {
    let config_json = serde_json::to_string(cfg)?;
    let mut files = Vec::new();
    let mut record = |name: &str| {
        files.push(name.to_string());
        dir.join(name)
    };

    write_csv::<&PerCycleRow>(&record("fig2b_per_cycle.csv"), &config_json, &out.prepared.per_cycle)?;
    write_csv(&record("fig3c_error_curve.csv"), &config_json, out.prepared.curve.tidy_rows())?;
    write_csv(&record("fig3d_error_curve.csv"), &config_json, out.noisy.curve.tidy_rows())?;
    let prepared_sweep = &out.prepared.calibration.as_ref().expect("calibrated run").sweep;
    let noisy_sweep = &out.noisy.calibration.as_ref().expect("calibrated run").sweep;
    write_csv(
        &record("figS1_readout_sweep.csv"),
        &config_json,
        sweep_rows("prepared", prepared_sweep).chain(sweep_rows("noisy", noisy_sweep)),
    )?;
    write_csv(&record("figS2_preparation.csv"), &config_json, composition_rows(out)?)?;

    if !plot_data_only {
        let runs = [("prepared", &out.prepared), ("ideal", &out.ideal), ("noisy", &out.noisy)];
        write_csv(
            &record("error_curves.csv"),
            &config_json,
            runs.iter().flat_map(|(run, o)| o.curve.tidy_rows().into_iter().map(move |row| RunTidyRow::new(run, row))),
        )?;
        let curves: serde_json::Map<String, serde_json::Value> = runs
            .iter()
            .map(|(run, o)| Ok((run.to_string(), serde_json::to_value(&o.curve)?)))
            .collect::<Result<_>>()?;
        write_json(
            &record("error_curves.json"),
            &serde_json::json!({ "config": cfg, "curves": curves }),
        )?;
        write_json(&record("fits.json"), &serde_json::json!({ "config": cfg, "fits": out.fits }))?;
        for (name, o) in [("calibration_prepared.json", &out.prepared), ("calibration_noisy.json", &out.noisy)] {
            write_json(&record(name), &serde_json::json!({ "config": cfg, "result": calibration_of(o)? }))?;
        }
    }

    files.push(MANIFEST_FILE.to_string());
    let manifest = Manifest {
        crate_name: env!("CARGO_PKG_NAME").to_string(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.base.sim.master_seed,
        config: cfg.clone(),
        files: files.clone(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(files)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    if manifest.config.base.sim.master_seed != manifest.master_seed {
        return Err(Error::invalid("manifest seed disagrees with its configuration"));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SuiteConfig {
        let mut cfg = SuiteConfig::paper_defaults();
        // Fewer trials let per-bin classification overfit pure noise below the target.
        cfg.base.n_trials_per_state = 2000;
        cfg.base.max_cycles = 5;
        cfg.extended_cycles = 6;
        cfg
    }

    #[test]
    fn paper_defaults_validate_and_round_trip() {
        let cfg = SuiteConfig::paper_defaults();
        cfg.validate().unwrap();
        let back: SuiteConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.ideal().max_cycles, 30);
        assert_eq!(cfg.prepared().prep_error_eta1, 0.04);
    }

    #[test]
    fn writes_all_datasets_and_manifest() {
        let cfg = tiny();
        let out = run_suite(&cfg).unwrap();
        assert!((out.fits.noise.calibration.eps_avg - 0.417).abs() < 0.05);
        let dir = tempfile::tempdir().unwrap();
        let files = write_suite(dir.path(), &cfg, &out, false).unwrap();
        for f in &files {
            let text = fs::read_to_string(dir.path().join(f)).unwrap();
            assert!(!text.is_empty(), "{f}");
            if f.ends_with(".csv") {
                assert!(text.starts_with("# config: {"), "{f}");
            }
        }
        let manifest = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.config, cfg);
        assert_eq!(manifest.files, files);

        let plot = tempfile::tempdir().unwrap();
        let plot_files = write_suite(plot.path(), &cfg, &out, true).unwrap();
        assert_eq!(plot_files.iter().filter(|f| f.starts_with("fig")).count(), 5);
        assert!(!plot_files.iter().any(|f| f == "fits.json"));
    }
}
