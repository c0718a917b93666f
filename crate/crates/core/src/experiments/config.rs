use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationSettings;
use crate::error::{Error, Result};
use crate::hmm::ObservationModel;
use crate::sim::SimConfig;

/// How per-cycle outcomes are combined into a logical decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    /// Thresholded bits through the binary-observation filter.
    Hard,
    /// Peak signals through the histogram-likelihood filter.
    Soft,
    /// Unweighted vote over thresholded bits.
    Majority,
}

impl DecodeMode {
    pub const ALL: [DecodeMode; 3] = [DecodeMode::Hard, DecodeMode::Soft, DecodeMode::Majority];

    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMode::Hard => "hard",
            DecodeMode::Soft => "soft",
            DecodeMode::Majority => "majority",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(DecodeMode::Hard),
            "soft" => Ok(DecodeMode::Soft),
            "majority" => Ok(DecodeMode::Majority),
            other => Err(Error::invalid(format!("unknown decode mode {other:?}"))),
        }
    }
}

/// Replaces traces by bits drawn directly from the hidden state with fixed error rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryChannel {
    pub eps1: f64,
    pub eps0: f64,
}

impl BinaryChannel {
    pub fn model(&self) -> Result<ObservationModel> {
        ObservationModel::binary(self.eps1, self.eps0)
    }
}

/// One Monte Carlo error-rate study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub n_trials_per_state: usize,
    pub max_cycles: usize,
    pub decode_modes: Vec<DecodeMode>,
    /// Extra white noise added to every calibration and evaluation trace.
    pub added_noise_sigma: f64,
    pub calibration: CalibrationSettings,
    /// `None`: calibrate on an independent, perfectly prepared set of
    /// `n_trials_per_state` traces per state. `Some(f)`: use the first cycle of
    /// the first `ceil(f * n)` evaluation trials instead.
    pub calibration_fraction: Option<f64>,
    /// Readout-time candidates; every sample instant when absent.
    pub t_r_grid: Option<Vec<f64>>,
    /// Probability that a trial meant to start in |1> starts in |0>.
    pub prep_error_eta1: f64,
    /// Probability that a trial meant to start in |0> starts in |1>.
    pub prep_error_eta0: f64,
    /// Bypass traces and calibration with a fixed binary channel.
    pub binary_channel: Option<BinaryChannel>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sim: SimConfig::default(),
            n_trials_per_state: 10_000,
            max_cycles: 15,
            decode_modes: DecodeMode::ALL.to_vec(),
            added_noise_sigma: 0.0,
            calibration: CalibrationSettings::default(),
            calibration_fraction: None,
            t_r_grid: None,
            prep_error_eta1: 0.0,
            prep_error_eta0: 0.0,
            binary_channel: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.calibration.validate()?;
        if self.n_trials_per_state < 100 {
            return Err(Error::invalid(format!(
                "n_trials_per_state must be >= 100, got {}",
                self.n_trials_per_state
            )));
        }
        if self.max_cycles == 0 {
            return Err(Error::invalid("max_cycles must be >= 1"));
        }
        if self.decode_modes.is_empty() {
            return Err(Error::invalid("at least one decode mode is required"));
        }
        if !(self.added_noise_sigma >= 0.0 && self.added_noise_sigma.is_finite()) {
            return Err(Error::invalid("added_noise_sigma must be finite and >= 0"));
        }
        if let Some(f) = self.calibration_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("calibration_fraction must lie in (0, 1], got {f}")));
            }
        }
        for (name, v) in [("prep_error_eta1", self.prep_error_eta1), ("prep_error_eta0", self.prep_error_eta0)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if let Some(grid) = &self.t_r_grid {
            if grid.is_empty() {
                return Err(Error::invalid("t_r_grid must not be empty"));
            }
        }
        if let Some(channel) = &self.binary_channel {
            channel.model()?;
            if self.decode_modes.contains(&DecodeMode::Soft) {
                return Err(Error::invalid("soft decoding needs traces; drop it with a binary channel"));
            }
        }
        Ok(())
    }
}
