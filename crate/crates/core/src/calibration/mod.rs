//! Peak-signal histograms, single-repetition error rates and readout-time selection.

mod distribution;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{ObservationModel, QubitState, DEFAULT_LLR_CLAMP};
use crate::sim::Trace;

pub use distribution::{uniform_edges, EmpiricalDistribution};

/// Histogram and smoothing parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    pub n_bins: usize,
    pub pseudo_count: f64,
    pub llr_clamp: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            n_bins: 60,
            pseudo_count: 0.5,
            llr_clamp: DEFAULT_LLR_CLAMP,
        }
    }
}

impl CalibrationSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 {
            return Err(Error::invalid("n_bins must be >= 1"));
        }
        if !(self.pseudo_count >= 0.0 && self.pseudo_count.is_finite()) {
            return Err(Error::invalid("pseudo_count must be finite and >= 0"));
        }
        if !(self.llr_clamp > 0.0 && self.llr_clamp.is_finite()) {
            return Err(Error::invalid("llr_clamp must be finite and > 0"));
        }
        Ok(())
    }
}

/// Number of samples taken strictly before `t_r`.
pub fn samples_within(t_r: f64, dt_sample: f64) -> Result<usize> {
    if !(dt_sample > 0.0) || !t_r.is_finite() {
        return Err(Error::invalid(format!("bad readout time {t_r} or sample period {dt_sample}")));
    }
    let ratio = t_r / dt_sample;
    if ratio < 1.0 - 1e-9 {
        return Err(Error::invalid(format!(
            "readout time {t_r} s is shorter than one sample period {dt_sample} s"
        )));
    }
    Ok((ratio - 1e-9).ceil() as usize)
}

/// Maximum of the samples recorded before `t_r`.
pub fn peak_signal(trace: &Trace, t_r: f64) -> Result<f64> {
    let n = samples_within(t_r, trace.dt_sample)?;
    if n > trace.samples.len() {
        return Err(Error::invalid(format!(
            "readout time {t_r} s exceeds the trace duration {} s",
            trace.duration()
        )));
    }
    Ok(trace.samples[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Readout-time grid at every sample instant: `k * dt` for `k = 1..=n_samples`.
pub fn default_grid(dt_sample: f64, n_samples: usize) -> Vec<f64> {
    (1..=n_samples).map(|k| k as f64 * dt_sample).collect()
}

/// Shared uniform edges over the pooled range, widened when degenerate.
pub fn shared_edges(peaks1: &[f64], peaks0: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if peaks1.is_empty() || peaks0.is_empty() {
        return Err(Error::EmptyInput("both labels need at least one trace"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in peaks1.iter().chain(peaks0) {
        if !p.is_finite() {
            return Err(Error::Data(format!("non-finite peak signal {p}")));
        }
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        lo -= 0.5;
        hi += 0.5;
    }
    uniform_edges(lo, hi, n_bins)
}

/// Histograms of two peak sets over shared edges.
pub fn distributions_from_peaks(
    peaks1: &[f64],
    peaks0: &[f64],
    n_bins: usize,
    pseudo_count: f64,
) -> Result<(EmpiricalDistribution, EmpiricalDistribution)> {
    let edges = shared_edges(peaks1, peaks0, n_bins)?;
    Ok((
        EmpiricalDistribution::from_values(edges.clone(), peaks1, pseudo_count)?,
        EmpiricalDistribution::from_values(edges, peaks0, pseudo_count)?,
    ))
}

pub fn build_distributions(
    traces1: &[Trace],
    traces0: &[Trace],
    t_r: f64,
    n_bins: usize,
    pseudo_count: f64,
) -> Result<(EmpiricalDistribution, EmpiricalDistribution)> {
    let peaks = |ts: &[Trace]| ts.iter().map(|t| peak_signal(t, t_r)).collect::<Result<Vec<_>>>();
    distributions_from_peaks(&peaks(traces1)?, &peaks(traces0)?, n_bins, pseudo_count)
}

/// Per-bin `ln(p1 / p0)` from smoothed probabilities, clamped to `+-clamp`;
/// bins with no mass under either label get 0.
pub fn llr_table(dist1: &EmpiricalDistribution, dist0: &EmpiricalDistribution, clamp: f64) -> Result<Vec<f64>> {
    if !dist1.same_edges(dist0) {
        return Err(Error::EdgeMismatch);
    }
    Ok((0..dist1.n_bins())
        .map(|b| {
            let (p1, p0) = (dist1.probability(b), dist0.probability(b));
            match (p1 > 0.0, p0 > 0.0) {
                (false, false) => 0.0,
                (true, false) => clamp,
                (false, true) => -clamp,
                (true, true) => (p1 / p0).ln().clamp(-clamp, clamp),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleRepErrors {
    pub eps1: f64,
    pub eps0: f64,
    pub eps_avg: f64,
}

/// Conditional error rates of the per-bin sign decision (`lambda <= 0` reads as 0).
///
/// The smoothed table fixes the decision; the rates are the fractions of
/// recorded counts it misclassifies, so they equal the trace-by-trace
/// misclassification frequencies.
pub fn single_rep_errors(dist1: &EmpiricalDistribution, dist0: &EmpiricalDistribution) -> Result<SingleRepErrors> {
    let table = llr_table(dist1, dist0, DEFAULT_LLR_CLAMP)?;
    errors_from_table(dist1, dist0, &table)
}

fn errors_from_table(
    dist1: &EmpiricalDistribution,
    dist0: &EmpiricalDistribution,
    table: &[f64],
) -> Result<SingleRepErrors> {
    if dist1.total() == 0 || dist0.total() == 0 {
        return Err(Error::EmptyInput("error rates need recorded counts for both labels"));
    }
    let mut wrong1 = 0u64;
    let mut wrong0 = 0u64;
    for (b, &l) in table.iter().enumerate() {
        if l > 0.0 {
            wrong0 += dist0.counts()[b];
        } else {
            wrong1 += dist1.counts()[b];
        }
    }
    let eps1 = wrong1 as f64 / dist1.total() as f64;
    let eps0 = wrong0 as f64 / dist0.total() as f64;
    Ok(SingleRepErrors {
        eps1,
        eps0,
        eps_avg: (eps1 + eps0) / 2.0,
    })
}

/// `sqrt(eps (1 - eps) / n)`.
pub fn binomial_stderr(eps: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("binomial standard error needs n >= 1"));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("error rate must lie in [0, 1], got {eps}")));
    }
    Ok((eps * (1.0 - eps) / n as f64).sqrt())
}

/// Calibrated single-repetition readout; serialized as the calibration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationResult {
    pub t_r_opt: f64,
    pub eps1: f64,
    pub eps0: f64,
    pub eps_avg: f64,
    pub stderr1: f64,
    pub stderr0: f64,
    pub bin_edges: Vec<f64>,
    pub counts1: Vec<u64>,
    pub counts0: Vec<u64>,
    pub pseudo_count: f64,
    pub llr_clamp: f64,
    pub llr_table: Vec<f64>,
    /// Peak signal above which the table reads 1, when it has a single sign change.
    pub threshold_equivalent: Option<f64>,
}

impl CalibrationResult {
    fn from_distributions(
        t_r: f64,
        dist1: &EmpiricalDistribution,
        dist0: &EmpiricalDistribution,
        llr_clamp: f64,
    ) -> Result<Self> {
        let table = llr_table(dist1, dist0, llr_clamp)?;
        let errors = errors_from_table(dist1, dist0, &table)?;
        Ok(CalibrationResult {
            t_r_opt: t_r,
            eps1: errors.eps1,
            eps0: errors.eps0,
            eps_avg: errors.eps_avg,
            stderr1: binomial_stderr(errors.eps1, dist1.total())?,
            stderr0: binomial_stderr(errors.eps0, dist0.total())?,
            threshold_equivalent: threshold_from_table(dist1.bin_edges(), &table),
            bin_edges: dist1.bin_edges().to_vec(),
            counts1: dist1.counts().to_vec(),
            counts0: dist0.counts().to_vec(),
            pseudo_count: dist1.pseudo_count(),
            llr_clamp,
            llr_table: table,
        })
    }

    pub fn dist1(&self) -> Result<EmpiricalDistribution> {
        Self::dist(&self.bin_edges, &self.counts1, self.pseudo_count)
    }

    pub fn dist0(&self) -> Result<EmpiricalDistribution> {
        Self::dist(&self.bin_edges, &self.counts0, self.pseudo_count)
    }

    fn dist(edges: &[f64], counts: &[u64], pseudo: f64) -> Result<EmpiricalDistribution> {
        let lo = edges.first().copied().unwrap_or(f64::NAN);
        let hi = edges.last().copied().unwrap_or(f64::NAN);
        let d = EmpiricalDistribution::from_counts(lo, hi, counts.to_vec(), pseudo)?;
        if d.bin_edges() != edges {
            return Err(Error::invalid("calibration bin edges are not uniform"));
        }
        Ok(d)
    }

    /// Consistency checks for a result read from disk.
    pub fn validate(&self) -> Result<()> {
        let d1 = self.dist1()?;
        self.dist0()?;
        if self.llr_table.len() != d1.n_bins() {
            return Err(Error::invalid("llr_table length does not match the bins"));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(Error::invalid("llr_clamp must be > 0"));
        }
        Ok(())
    }

    /// Soft-decoding model built from the stored histograms.
    pub fn observation_model(&self) -> Result<ObservationModel> {
        ObservationModel::empirical(self.dist1()?, self.dist0()?, self.llr_clamp)
    }

    /// Hard-decoding model with the calibrated error rates, each floored at
    /// half a count so an error never seen in calibration stays possible.
    pub fn binary_model(&self) -> Result<ObservationModel> {
        let floor = |eps: f64, counts: &[u64]| eps.max(0.5 / counts.iter().sum::<u64>().max(1) as f64);
        ObservationModel::binary(floor(self.eps1, &self.counts1), floor(self.eps0, &self.counts0))
    }

    /// Thresholded bit: 1 iff the table entry of the peak's bin is positive.
    pub fn classify(&self, peak: f64) -> QubitState {
        let b = distribution::bin_of(&self.bin_edges, peak);
        QubitState::from(self.llr_table[b] > 0.0)
    }
}

fn threshold_from_table(edges: &[f64], table: &[f64]) -> Option<f64> {
    let positive: Vec<bool> = table.iter().map(|&l| l > 0.0).collect();
    let changes = positive.windows(2).filter(|w| w[0] != w[1]).count();
    match (changes, positive.first(), positive.last()) {
        (1, Some(false), Some(true)) => positive.iter().position(|&p| p).map(|b| edges[b]),
        _ => None,
    }
}

/// Error rates at one readout time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t_r: f64,
    pub eps1: f64,
    pub eps0: f64,
    pub eps_avg: f64,
}

/// Chosen readout time plus the full error-rate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub result: CalibrationResult,
    pub sweep: Vec<SweepPoint>,
}

/// Selects the readout time minimizing the average error (ties to the
/// earliest time) from traces reduced to running maxima.
///
/// `prefix_max1[j][i]` is the peak of trace `j` over its first `i + 1` samples.
pub fn optimize_from_prefix_maxima(
    prefix_max1: &[Vec<f64>],
    prefix_max0: &[Vec<f64>],
    dt_sample: f64,
    t_r_grid: &[f64],
    settings: &CalibrationSettings,
) -> Result<Calibration> {
    settings.validate()?;
    if t_r_grid.is_empty() {
        return Err(Error::EmptyInput("readout-time grid is empty"));
    }
    if prefix_max1.is_empty() || prefix_max0.is_empty() {
        return Err(Error::EmptyInput("both labels need at least one trace"));
    }
    let shortest = prefix_max1.iter().chain(prefix_max0).map(Vec::len).min().unwrap_or(0);
    let lengths = t_r_grid
        .iter()
        .map(|&t| {
            let n = samples_within(t, dt_sample)?;
            if n > shortest {
                return Err(Error::invalid(format!("readout time {t} s exceeds the trace duration")));
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluate = |n: usize| -> Result<(EmpiricalDistribution, EmpiricalDistribution, SingleRepErrors)> {
        let p1: Vec<f64> = prefix_max1.iter().map(|pm| pm[n - 1]).collect();
        let p0: Vec<f64> = prefix_max0.iter().map(|pm| pm[n - 1]).collect();
        let (d1, d0) = distributions_from_peaks(&p1, &p0, settings.n_bins, settings.pseudo_count)?;
        let table = llr_table(&d1, &d0, settings.llr_clamp)?;
        let errors = errors_from_table(&d1, &d0, &table)?;
        Ok((d1, d0, errors))
    };

    let sweep = t_r_grid
        .par_iter()
        .zip(lengths.par_iter())
        .map(|(&t_r, &n)| {
            let e = evaluate(n)?.2;
            Ok(SweepPoint {
                t_r,
                eps1: e.eps1,
                eps0: e.eps0,
                eps_avg: e.eps_avg,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = (0..sweep.len())
        .min_by(|&a, &b| {
            sweep[a]
                .eps_avg
                .total_cmp(&sweep[b].eps_avg)
                .then(sweep[a].t_r.total_cmp(&sweep[b].t_r))
        })
        .expect("non-empty grid");
    let (d1, d0, _) = evaluate(lengths[best])?;
    let result = CalibrationResult::from_distributions(sweep[best].t_r, &d1, &d0, settings.llr_clamp)?;

    // The marginals must reproduce trace-by-trace classification exactly.
    let n = lengths[best];
    let wrong1 = prefix_max1.iter().filter(|pm| !result.classify(pm[n - 1]).is_one()).count();
    let wrong0 = prefix_max0.iter().filter(|pm| result.classify(pm[n - 1]).is_one()).count();
    if wrong1 as f64 / prefix_max1.len() as f64 != result.eps1 || wrong0 as f64 / prefix_max0.len() as f64 != result.eps0 {
        return Err(Error::Numerical(
            "histogram error rates disagree with trace-by-trace classification".into(),
        ));
    }
    Ok(Calibration { result, sweep })
}

/// [`optimize_from_prefix_maxima`] on full traces.
pub fn optimize_readout_time(
    traces1: &[Trace],
    traces0: &[Trace],
    t_r_grid: &[f64],
    settings: &CalibrationSettings,
) -> Result<Calibration> {
    let dt = traces1
        .first()
        .or(traces0.first())
        .map(|t| t.dt_sample)
        .ok_or(Error::EmptyInput("both labels need at least one trace"))?;
    if traces1.iter().chain(traces0).any(|t| t.dt_sample != dt) {
        return Err(Error::Data("traces use different sample periods".into()));
    }
    let pm1: Vec<Vec<f64>> = traces1.iter().map(Trace::prefix_max).collect();
    let pm0: Vec<Vec<f64>> = traces0.iter().map(Trace::prefix_max).collect();
    optimize_from_prefix_maxima(&pm1, &pm0, dt, t_r_grid, settings)
}

/// Error rates at every grid point.
pub fn readout_time_sweep(
    traces1: &[Trace],
    traces0: &[Trace],
    t_r_grid: &[f64],
    settings: &CalibrationSettings,
) -> Result<Vec<SweepPoint>> {
    Ok(optimize_readout_time(traces1, traces0, t_r_grid, settings)?.sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn trace(samples: &[f64]) -> Trace {
        Trace { samples: samples.to_vec(), dt_sample: 1e-5 }
    }

    #[test]
    fn peak_signal_prefixes() {
        let t = trace(&[0.1, 0.5, 0.3]);
        assert_eq!(peak_signal(&t, 3e-5).unwrap(), 0.5);
        assert_eq!(peak_signal(&t, 1e-5).unwrap(), 0.1);
        assert_eq!(peak_signal(&t, 1.5e-5).unwrap(), 0.5);
        assert!(peak_signal(&t, 0.5e-5).is_err());
        assert!(peak_signal(&t, 4e-5).is_err());
        let mut last = f64::NEG_INFINITY;
        for t_r in default_grid(1e-5, 3) {
            let p = peak_signal(&t, t_r).unwrap();
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn hand_built_four_bin_errors() {
        // llr signs: bin0 -, bin1 -, bin2 +, bin3 +.
        let d1 = EmpiricalDistribution::from_counts(0.0, 4.0, vec![1, 2, 3, 4], 0.5).unwrap();
        let d0 = EmpiricalDistribution::from_counts(0.0, 4.0, vec![4, 3, 2, 1], 0.5).unwrap();
        let e = single_rep_errors(&d1, &d0).unwrap();
        assert_abs_diff_eq!(e.eps1, 3.0 / 10.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eps0, 3.0 / 10.0, epsilon = 1e-15);
        // Asymmetric overlap; bin1 is an exact tie and reads as 0.
        let d1 = EmpiricalDistribution::from_counts(0.0, 4.0, vec![0, 5, 10, 25], 0.5).unwrap();
        let d0 = EmpiricalDistribution::from_counts(0.0, 4.0, vec![30, 5, 4, 1], 0.5).unwrap();
        let e = single_rep_errors(&d1, &d0).unwrap();
        assert_abs_diff_eq!(e.eps1, 5.0 / 40.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eps0, 5.0 / 40.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eps_avg, 0.125, epsilon = 1e-15);
    }

    #[test]
    fn identical_distributions_are_uninformative() {
        let d = EmpiricalDistribution::from_counts(0.0, 1.0, vec![3, 1, 4, 1, 5], 0.5).unwrap();
        let e = single_rep_errors(&d, &d).unwrap();
        assert_eq!((e.eps1, e.eps0, e.eps_avg), (1.0, 0.0, 0.5));
        assert!(llr_table(&d, &d, 50.0).unwrap().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn separated_supports() {
        let ones: Vec<Trace> = (0..50).map(|_| trace(&[0.0, 1.0, 1.0])).collect();
        let zeros: Vec<Trace> = (0..50).map(|_| trace(&[0.0, 0.0, 0.0])).collect();
        let (d1, d0) = build_distributions(&ones, &zeros, 3e-5, 10, 0.0).unwrap();
        assert_eq!(d1.counts()[9], 50);
        assert_eq!(d0.counts()[0], 50);
        let table = llr_table(&d1, &d0, 50.0).unwrap();
        assert_eq!(table[9], 50.0);
        assert_eq!(table[0], -50.0);
        assert_eq!(table[4], 0.0);
        let e = single_rep_errors(&d1, &d0).unwrap();
        assert_eq!((e.eps1, e.eps0), (0.0, 0.0));
    }

    #[test]
    fn flat_objective_picks_earliest_informative_time() {
        let ones: Vec<Trace> = (0..20).map(|_| trace(&[0.0, 1.0, 1.0, 1.0])).collect();
        let zeros: Vec<Trace> = (0..20).map(|_| trace(&[0.0, 0.0, 0.0, 0.0])).collect();
        let cal = optimize_readout_time(&ones, &zeros, &default_grid(1e-5, 4), &CalibrationSettings::default()).unwrap();
        assert_eq!(cal.sweep.len(), 4);
        assert_eq!(cal.sweep[0].eps_avg, 0.5);
        assert_eq!(cal.result.eps_avg, 0.0);
        assert_abs_diff_eq!(cal.result.t_r_opt, 2e-5, epsilon = 1e-18);
        assert!(cal.result.threshold_equivalent.is_some());
    }

    #[test]
    fn empty_inputs_rejected() {
        let ones = vec![trace(&[0.0, 1.0])];
        assert!(optimize_readout_time(&ones, &[], &[1e-5], &CalibrationSettings::default()).is_err());
        assert!(optimize_readout_time(&ones, &ones, &[], &CalibrationSettings::default()).is_err());
        assert!(build_distributions(&[], &ones, 1e-5, 4, 0.5).is_err());
    }

    #[test]
    fn stderr_examples() {
        assert_abs_diff_eq!(binomial_stderr(0.5, 10_000).unwrap(), 0.005, epsilon = 1e-15);
        assert_abs_diff_eq!(binomial_stderr(0.329, 10_000).unwrap(), 0.0047, epsilon = 1e-4);
        assert_eq!(binomial_stderr(0.0, 17).unwrap(), 0.0);
        assert!(binomial_stderr(0.5, 0).is_err());
    }

    #[test]
    fn edge_mismatch_rejected() {
        let a = EmpiricalDistribution::from_counts(0.0, 1.0, vec![1, 1], 0.5).unwrap();
        let b = EmpiricalDistribution::from_counts(0.0, 2.0, vec![1, 1], 0.5).unwrap();
        assert!(matches!(single_rep_errors(&a, &b), Err(Error::EdgeMismatch)));
    }

    #[test]
    fn result_json_round_trip() {
        let ones: Vec<Trace> = (0..20).map(|i| trace(&[0.0, 0.9 + 0.01 * i as f64, 1.0])).collect();
        let zeros: Vec<Trace> = (0..20).map(|i| trace(&[0.01 * i as f64, 0.0, 0.1])).collect();
        let cal = optimize_readout_time(&ones, &zeros, &default_grid(1e-5, 3), &CalibrationSettings::default()).unwrap();
        let s = serde_json::to_string(&cal.result).unwrap();
        let back: CalibrationResult = serde_json::from_str(&s).unwrap();
        back.validate().unwrap();
        assert_eq!(back, cal.result);
        assert!(back.observation_model().is_ok());
    }
}
