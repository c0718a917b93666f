use serde::Serialize;

use super::observation::{ObservationModel, ReadoutRecord};
use super::transition::relaxation_transition;
use super::QubitState;
use crate::error::{Error, Result};

/// Magnitude (nats) substituted for an infinite log-likelihood ratio.
pub const DEFAULT_LLR_CLAMP: f64 = 50.0;

/// Normalized forward-filter state after `cycle_index` observations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeliefState {
    pub rho: [f64; 2],
    pub log_likelihood: f64,
    pub cycle_index: usize,
}

impl BeliefState {
    /// All mass on `x`, nothing observed yet.
    pub fn delta(x: QubitState) -> Self {
        let mut rho = [0.0; 2];
        rho[x.index()] = 1.0;
        BeliefState {
            rho,
            log_likelihood: 0.0,
            cycle_index: 0,
        }
    }

    pub fn new(rho: [f64; 2]) -> Self {
        BeliefState {
            rho,
            log_likelihood: 0.0,
            cycle_index: 0,
        }
    }
}

/// One filter update with `v[x][y] = w[x][y] * P(O_k | y)`.
pub fn forward_step(belief: &BeliefState, v: &[[f64; 2]; 2]) -> Result<BeliefState> {
    let r = belief.rho;
    let propagated = [
        v[0][0] * r[0] + v[0][1] * r[1],
        v[1][0] * r[0] + v[1][1] * r[1],
    ];
    let norm = propagated[0] + propagated[1];
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateObservation {
            cycle: belief.cycle_index,
        });
    }
    Ok(BeliefState {
        rho: [propagated[0] / norm, propagated[1] / norm],
        log_likelihood: belief.log_likelihood + norm.ln(),
        cycle_index: belief.cycle_index + 1,
    })
}

/// Prior probabilities of the logical state before the first cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Priors {
    pub p1: f64,
    pub p0: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors { p1: 0.5, p0: 0.5 }
    }
}

impl Priors {
    pub fn new(p1: f64, p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) || !(0.0..=1.0).contains(&p0) || (p1 + p0 - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("priors must be probabilities summing to 1, got ({p1}, {p0})")));
        }
        Ok(Priors { p1, p0 })
    }

    fn log_ratio(&self, clamp: f64) -> f64 {
        if self.p0 == 0.0 {
            clamp
        } else if self.p1 == 0.0 {
            -clamp
        } else {
            (self.p1 / self.p0).ln()
        }
    }
}

/// Outcome of decoding one record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeResult {
    pub lambda_log: f64,
    pub decision: QubitState,
    /// `[filter from |1>, filter from |0>]` after each cycle.
    #[serde(skip)]
    pub belief_trajectory: Vec<[BeliefState; 2]>,
    /// `lambda_log` restricted to the first `k + 1` cycles.
    pub per_cycle_lambda: Vec<f64>,
}

pub(crate) fn decide(lambda_log: f64) -> QubitState {
    QubitState::from(lambda_log > 0.0)
}

pub fn decode(
    record: &ReadoutRecord,
    model: &ObservationModel,
    t1: f64,
    priors: Priors,
) -> Result<DecodeResult> {
    decode_with_clamp(record, model, t1, priors, DEFAULT_LLR_CLAMP)
}

/// Two forward filters started from `|1>` and `|0>`; `lambda_log` is the
/// difference of their log-likelihoods plus the prior log-odds.
///
/// A filter whose likelihood reaches exactly zero is frozen and the ratio is
/// reported as `-+clamp`; both vanishing is an error.
pub fn decode_with_clamp(
    record: &ReadoutRecord,
    model: &ObservationModel,
    t1: f64,
    priors: Priors,
    clamp: f64,
) -> Result<DecodeResult> {
    if record.observations.kind() != model.kind() {
        return Err(Error::KindMismatch {
            expected: model.kind(),
            found: record.observations.kind(),
        });
    }
    let w = relaxation_transition(record.cycle_duration_s, t1)?.as_array();
    let prior_term = priors.log_ratio(clamp);

    let mut beliefs = [BeliefState::delta(QubitState::One), BeliefState::delta(QubitState::Zero)];
    let mut alive = [true, true];
    let n = record.len();
    let mut trajectory = Vec::with_capacity(n);
    let mut per_cycle = Vec::with_capacity(n);

    for (k, o) in record.observations.iter().enumerate() {
        let p = model.observation_vector(o)?;
        let v = [
            [w[0][0] * p[0], w[0][1] * p[1]],
            [w[1][0] * p[0], w[1][1] * p[1]],
        ];
        for h in 0..2 {
            if !alive[h] {
                continue;
            }
            match forward_step(&beliefs[h], &v) {
                Ok(next) => beliefs[h] = next,
                Err(Error::DegenerateObservation { .. }) => {
                    alive[h] = false;
                    beliefs[h].log_likelihood = f64::NEG_INFINITY;
                }
                Err(e) => return Err(e),
            }
        }
        let lambda = match alive {
            [true, true] => beliefs[0].log_likelihood - beliefs[1].log_likelihood + prior_term,
            [true, false] => clamp,
            [false, true] => -clamp,
            [false, false] => return Err(Error::DegenerateObservation { cycle: k }),
        };
        trajectory.push(beliefs);
        per_cycle.push(lambda);
    }

    let lambda_log = per_cycle.last().copied().unwrap_or(prior_term);
    Ok(DecodeResult {
        lambda_log,
        decision: decide(lambda_log),
        belief_trajectory: trajectory,
        per_cycle_lambda: per_cycle,
    })
}

/// Unweighted vote; ties go to `0`.
pub fn majority_vote(bits: &[QubitState]) -> Result<QubitState> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("majority vote needs at least one outcome"));
    }
    let ones = bits.iter().filter(|b| b.is_one()).count();
    Ok(QubitState::from(2 * ones > bits.len()))
}
