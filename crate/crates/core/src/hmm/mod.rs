//! Hidden-Markov-model inference of the pre-measurement logical state.
//!
//! Vectors and matrices are indexed in the fixed basis order `(|1>, |0>)`:
//! index 0 is spin-up, index 1 is spin-down. [`QubitState::index`] maps a
//! state onto that order.

mod filter;
mod observation;
mod oracle;
mod transition;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use filter::{
    decode, decode_with_clamp, forward_step, majority_vote, BeliefState, DecodeResult, Priors,
    DEFAULT_LLR_CLAMP,
};
pub use observation::{Observation, ObservationModel, Observations, ReadoutRecord};
pub use oracle::{brute_force_likelihood, MAX_ENUMERATION_LEN};
pub use transition::{relaxation_transition, TransitionMatrix};

/// Classical logical (or ancilla) spin state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum QubitState {
    Zero,
    One,
}

impl QubitState {
    /// Position in the `(|1>, |0>)` basis.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            QubitState::One => 0,
            QubitState::Zero => 1,
        }
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        if index == 0 {
            QubitState::One
        } else {
            QubitState::Zero
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            QubitState::One => QubitState::Zero,
            QubitState::Zero => QubitState::One,
        }
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self == QubitState::One
    }

    pub const BOTH: [QubitState; 2] = [QubitState::One, QubitState::Zero];
}

impl From<bool> for QubitState {
    fn from(b: bool) -> Self {
        if b {
            QubitState::One
        } else {
            QubitState::Zero
        }
    }
}

impl From<QubitState> for u8 {
    fn from(s: QubitState) -> u8 {
        match s {
            QubitState::One => 1,
            QubitState::Zero => 0,
        }
    }
}

impl TryFrom<u8> for QubitState {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self, Error> {
        match v {
            0 => Ok(QubitState::Zero),
            1 => Ok(QubitState::One),
            other => Err(Error::invalid(format!("qubit state must be 0 or 1, got {other}"))),
        }
    }
}

impl std::fmt::Display for QubitState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order_is_one_then_zero() {
        assert_eq!(QubitState::One.index(), 0);
        assert_eq!(QubitState::Zero.index(), 1);
        for s in QubitState::BOTH {
            assert_eq!(QubitState::from_index(s.index()), s);
            assert_eq!(s.flipped().flipped(), s);
        }
    }

    #[test]
    fn serializes_as_bit() {
        assert_eq!(serde_json::to_string(&QubitState::One).unwrap(), "1");
        let s: QubitState = serde_json::from_str("0").unwrap();
        assert_eq!(s, QubitState::Zero);
        assert!(serde_json::from_str::<QubitState>("2").is_err());
    }
}
