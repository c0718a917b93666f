use serde::{Deserialize, Serialize};

use super::DecodeMode;
use crate::calibration::binomial_stderr;
use crate::error::{Error, Result};
use crate::hmm::QubitState;

/// Logical error rates after `n` cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub eps1: f64,
    pub stderr1: f64,
    pub eps0: f64,
    pub stderr0: f64,
    pub eps_avg: f64,
    pub stderr_avg: f64,
    pub fidelity: f64,
    pub visibility: f64,
}

impl CurvePoint {
    pub fn from_counts(n: usize, errors1: u64, trials1: u64, errors0: u64, trials0: u64) -> Result<Self> {
        if trials1 == 0 || trials0 == 0 {
            return Err(Error::EmptyInput("error rates need trials for both states"));
        }
        let eps1 = errors1 as f64 / trials1 as f64;
        let eps0 = errors0 as f64 / trials0 as f64;
        let stderr1 = binomial_stderr(eps1, trials1)?;
        let stderr0 = binomial_stderr(eps0, trials0)?;
        let eps_avg = (eps1 + eps0) / 2.0;
        Ok(CurvePoint {
            n,
            eps1,
            stderr1,
            eps0,
            stderr0,
            eps_avg,
            stderr_avg: stderr1.hypot(stderr0) / 2.0,
            fidelity: 1.0 - eps_avg,
            visibility: 1.0 - 2.0 * eps_avg,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCurve {
    pub mode: DecodeMode,
    /// Points for `n = 1..=max_cycles`.
    pub points: Vec<CurvePoint>,
}

impl ModeCurve {
    pub fn at(&self, n: usize) -> Option<&CurvePoint> {
        self.points.get(n.checked_sub(1)?)
    }
}

/// Logical error rate versus number of cycles, per decoding mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub n_trials_per_state: usize,
    pub curves: Vec<ModeCurve>,
}

/// Long-format row: one rate per mode, prepared state (`1`, `0` or `avg`) and `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub mode: DecodeMode,
    pub prepared_state: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub eps: f64,
    pub stderr: f64,
}

impl ErrorCurve {
    pub fn mode(&self, mode: DecodeMode) -> Option<&ModeCurve> {
        self.curves.iter().find(|c| c.mode == mode)
    }

    pub fn tidy_rows(&self) -> Vec<TidyRow> {
        let mut rows = Vec::new();
        for curve in &self.curves {
            for (label, pick) in [
                ("1", (|p: &CurvePoint| (p.eps1, p.stderr1)) as fn(&CurvePoint) -> (f64, f64)),
                ("0", |p| (p.eps0, p.stderr0)),
                ("avg", |p| (p.eps_avg, p.stderr_avg)),
            ] {
                for p in &curve.points {
                    let (eps, stderr) = pick(p);
                    rows.push(TidyRow {
                        mode: curve.mode,
                        prepared_state: label.to_string(),
                        n: p.n,
                        eps,
                        stderr,
                    });
                }
            }
        }
        rows
    }
}

/// Spin-up probabilities per cycle (single repetition) and after `n` cycles (cumulative).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerCycleRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Time of cycle `n` after the first readout (s).
    pub time_s: f64,
    pub single_prep1: f64,
    pub single_prep0: f64,
    pub cumulative_prep1: f64,
    pub cumulative_prep0: f64,
    pub visibility_single: f64,
    pub visibility_cumulative: f64,
}

fn fraction_one(rows: &[Vec<QubitState>], k: usize) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no trials"));
    }
    let mut ones = 0usize;
    for r in rows {
        let b = r.get(k).ok_or_else(|| Error::Data(format!("trial has no cycle {}", k + 1)))?;
        ones += b.is_one() as usize;
    }
    Ok(ones as f64 / rows.len() as f64)
}

/// `bits*[trial][k]` is the single-repetition reading of cycle `k`;
/// `decisions*[trial][k]` the cumulative decision after `k + 1` cycles.
pub fn per_cycle_probabilities(
    bits1: &[Vec<QubitState>],
    bits0: &[Vec<QubitState>],
    decisions1: &[Vec<QubitState>],
    decisions0: &[Vec<QubitState>],
    dt_rep: f64,
) -> Result<Vec<PerCycleRow>> {
    let n_cycles = bits1.first().map_or(0, Vec::len);
    (0..n_cycles)
        .map(|k| {
            let single_prep1 = fraction_one(bits1, k)?;
            let single_prep0 = fraction_one(bits0, k)?;
            let cumulative_prep1 = fraction_one(decisions1, k)?;
            let cumulative_prep0 = fraction_one(decisions0, k)?;
            Ok(PerCycleRow {
                n: k + 1,
                time_s: k as f64 * dt_rep,
                single_prep1,
                single_prep0,
                cumulative_prep1,
                cumulative_prep0,
                visibility_single: single_prep1 - single_prep0,
                visibility_cumulative: cumulative_prep1 - cumulative_prep0,
            })
        })
        .collect()
}
