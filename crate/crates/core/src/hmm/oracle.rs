use super::observation::{ObservationModel, ReadoutRecord};
use super::transition::relaxation_transition;
use super::QubitState;
use crate::error::{Error, Result};

/// Longest record accepted by [`brute_force_likelihood`].
pub const MAX_ENUMERATION_LEN: usize = 20;

/// Exact `P(O_1..O_N | x_0)` by summing over all `2^N` hidden paths.
///
/// Cycle `k` observes `x_k`; the state then relaxes to `x_{k+1}`. Slow, meant
/// as a reference for the forward filter.
pub fn brute_force_likelihood(
    record: &ReadoutRecord,
    model: &ObservationModel,
    t1: f64,
    x0: QubitState,
) -> Result<f64> {
    let n = record.len();
    if n > MAX_ENUMERATION_LEN {
        return Err(Error::RecordTooLong {
            len: n,
            max: MAX_ENUMERATION_LEN,
        });
    }
    let w = relaxation_transition(record.cycle_duration_s, t1)?;
    let probs: Vec<[f64; 2]> = record
        .observations
        .iter()
        .map(|o| model.observation_vector(o))
        .collect::<Result<_>>()?;

    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        // Bit k - 1 of `mask` holds x_k for k = 1..=n.
        let state_at = |k: usize| {
            if k == 0 {
                x0.index()
            } else {
                ((mask >> (k - 1)) & 1) as usize
            }
        };
        let mut path = 1.0;
        for (k, p) in probs.iter().enumerate() {
            let here = state_at(k);
            path *= w.get(state_at(k + 1), here) * p[here];
        }
        total += path;
    }
    Ok(total)
}
