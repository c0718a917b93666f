//! Monte Carlo error-rate studies, fits and the figure-data suite.

mod config;
mod curve;
mod fit;
mod runner;
mod suite;

pub use config::{BinaryChannel, DecodeMode, ExperimentConfig};
pub use curve::{per_cycle_probabilities, CurvePoint, ErrorCurve, ModeCurve, PerCycleRow, TidyRow};
pub use fit::{fit_preparation_error, fit_t1, FitParameter, FitResult, FitStatus};
pub use runner::{
    calibrate_experiment, evaluate, run_error_curve, run_experiment, tune_added_noise, CalibrationSummary,
    ExperimentOutput, NoiseTuning,
};
pub use suite::{
    read_manifest, run_suite, write_suite, Manifest, NoiseSummary, PreparationFit, SuiteConfig, SuiteFits,
    SuiteOutput, MANIFEST_FILE,
};
