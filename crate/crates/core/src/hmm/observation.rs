use serde::{Deserialize, Serialize};

use super::QubitState;
use crate::calibration::EmpiricalDistribution;
use crate::error::{Error, Result};

/// One per-cycle outcome: a thresholded bit or an analog peak signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation {
    Binary(QubitState),
    Peak(f64),
}

impl Observation {
    pub fn kind(&self) -> &'static str {
        match self {
            Observation::Binary(_) => "binary",
            Observation::Peak(_) => "peak",
        }
    }
}

/// Homogeneous observation sequence of one record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "observations", rename_all = "lowercase")]
pub enum Observations {
    Binary(Vec<QubitState>),
    Peak(Vec<f64>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Binary(v) => v.len(),
            Observations::Peak(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> Option<Observation> {
        match self {
            Observations::Binary(v) => v.get(k).map(|&b| Observation::Binary(b)),
            Observations::Peak(v) => v.get(k).map(|&p| Observation::Peak(p)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Observation> + '_ {
        (0..self.len()).filter_map(move |k| self.get(k))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Observations::Binary(_) => "binary",
            Observations::Peak(_) => "peak",
        }
    }

    /// First `n` observations.
    pub fn prefix(&self, n: usize) -> Observations {
        match self {
            Observations::Binary(v) => Observations::Binary(v[..n.min(v.len())].to_vec()),
            Observations::Peak(v) => Observations::Peak(v[..n.min(v.len())].to_vec()),
        }
    }
}

/// Per-cycle observations of one repetitive readout plus the cycle period.
///
/// Serialized as `{"cycle_duration_s": .., "kind": "binary"|"peak", "observations": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutRecord {
    pub cycle_duration_s: f64,
    #[serde(flatten)]
    pub observations: Observations,
}

impl ReadoutRecord {
    pub fn binary(cycle_duration_s: f64, bits: Vec<QubitState>) -> Self {
        ReadoutRecord {
            cycle_duration_s,
            observations: Observations::Binary(bits),
        }
    }

    pub fn peak(cycle_duration_s: f64, peaks: Vec<f64>) -> Self {
        ReadoutRecord {
            cycle_duration_s,
            observations: Observations::Peak(peaks),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Per-state outcome distributions used by the forward filter.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservationModel {
    /// Hard decoding: conditional single-repetition error rates.
    Binary { eps1: f64, eps0: f64 },
    /// Soft decoding: calibrated peak-signal histograms on shared edges.
    Empirical {
        dist1: EmpiricalDistribution,
        dist0: EmpiricalDistribution,
        llr_clamp: f64,
    },
}

impl ObservationModel {
    /// `eps1 = P(0 | x=1)`, `eps0 = P(1 | x=0)`. Exact zeros are allowed.
    pub fn binary(eps1: f64, eps0: f64) -> Result<Self> {
        for (name, e) in [("eps1", eps1), ("eps0", eps0)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {e}")));
            }
        }
        if eps1 + eps0 >= 1.0 {
            return Err(Error::invalid(format!(
                "uninformative binary channel: eps1 + eps0 = {} >= 1",
                eps1 + eps0
            )));
        }
        Ok(ObservationModel::Binary { eps1, eps0 })
    }

    pub fn empirical(
        dist1: EmpiricalDistribution,
        dist0: EmpiricalDistribution,
        llr_clamp: f64,
    ) -> Result<Self> {
        if !(llr_clamp > 0.0) {
            return Err(Error::invalid("llr_clamp must be > 0"));
        }
        if !dist1.same_edges(&dist0) {
            return Err(Error::EdgeMismatch);
        }
        Ok(ObservationModel::Empirical {
            dist1,
            dist0,
            llr_clamp,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ObservationModel::Binary { .. } => "binary",
            ObservationModel::Empirical { .. } => "peak",
        }
    }

    /// `(P(o | 1), P(o | 0))`.
    ///
    /// Empirical entries are strictly positive: a bin empty under one state is
    /// lifted so that `|ln(p1/p0)| <= llr_clamp`; a bin empty under both gets
    /// equal entries.
    pub fn observation_vector(&self, o: Observation) -> Result<[f64; 2]> {
        match (self, o) {
            (ObservationModel::Binary { eps1, eps0 }, Observation::Binary(bit)) => Ok(match bit {
                QubitState::One => [1.0 - eps1, *eps0],
                QubitState::Zero => [*eps1, 1.0 - eps0],
            }),
            (
                ObservationModel::Empirical {
                    dist1,
                    dist0,
                    llr_clamp,
                },
                Observation::Peak(value),
            ) => {
                if !value.is_finite() {
                    return Err(Error::Data(format!("non-finite peak signal {value}")));
                }
                let bin = dist1.bin_index(value);
                Ok(clamp_pair(dist1.probability(bin), dist0.probability(bin), *llr_clamp, dist1.n_bins()))
            }
            (model, o) => Err(Error::KindMismatch {
                expected: model.kind(),
                found: o.kind(),
            }),
        }
    }

    /// Single-outcome log-likelihood ratio `ln(P(o|1)/P(o|0))`.
    pub fn llr(&self, o: Observation) -> Result<f64> {
        let [p1, p0] = self.observation_vector(o)?;
        Ok((p1 / p0).ln())
    }
}

fn clamp_pair(p1: f64, p0: f64, clamp: f64, n_bins: usize) -> [f64; 2] {
    if p1 <= 0.0 && p0 <= 0.0 {
        let u = 1.0 / n_bins as f64;
        return [u, u];
    }
    let floor = (-clamp).exp();
    if p0 < p1 * floor {
        [p1, p1 * floor]
    } else if p1 < p0 * floor {
        [p0 * floor, p0]
    } else {
        [p1, p0]
    }
}
