use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and numerical parameters of the simulated device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Sensor sampling interval (s).
    pub dt_sample: f64,
    /// Recorded window per ancilla readout (s).
    pub trace_length: f64,
    /// Cycle period (s).
    pub dt_rep: f64,
    /// Logical-qubit relaxation time (s); `"inf"` disables relaxation.
    #[serde(with = "extended_f64")]
    pub t1_logical: f64,
    /// Ancilla relaxation time while waiting to tunnel (s).
    #[serde(with = "extended_f64")]
    pub t1_ancilla: f64,
    /// Spin-up tunnel-out rate (1/s).
    #[serde(with = "extended_f64")]
    pub gamma_out: f64,
    /// Tunnel-back-in rate of a spin-down electron (1/s).
    #[serde(with = "extended_f64")]
    pub gamma_in: f64,
    /// Spurious spin-down escape rate (1/s).
    #[serde(with = "extended_f64")]
    pub gamma_dark: f64,
    pub p_crot_flip: f64,
    pub p_ancilla_init: f64,
    /// Sensor level with the dot occupied.
    pub i_low: f64,
    /// Sensor level with the dot empty.
    pub i_high: f64,
    /// White-noise standard deviation per sample.
    pub sigma_noise: f64,
    /// Trailing moving-average width applied before noise; 1 disables it.
    pub filter_samples: usize,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_sample: 16.38e-6,
            trace_length: 2.01e-3,
            dt_rep: 3.263e-3,
            t1_logical: 1.8,
            t1_ancilla: 1e-3,
            gamma_out: 1e4,
            gamma_in: 1e4,
            gamma_dark: 0.0,
            p_crot_flip: 0.0,
            p_ancilla_init: 0.0,
            i_low: 0.0,
            i_high: 1.0,
            sigma_noise: 0.15,
            filter_samples: 1,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive_finite = [
            ("dt_sample", self.dt_sample),
            ("trace_length", self.trace_length),
        ];
        for (name, v) in positive_finite {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.dt_rep >= 0.0 && self.dt_rep.is_finite()) {
            return Err(Error::invalid(format!("dt_rep must be finite and >= 0, got {}", self.dt_rep)));
        }
        for (name, v) in [("t1_logical", self.t1_logical), ("t1_ancilla", self.t1_ancilla)] {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("gamma_out", self.gamma_out),
            ("gamma_in", self.gamma_in),
            ("gamma_dark", self.gamma_dark),
        ] {
            if !(v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("p_crot_flip", self.p_crot_flip), ("p_ancilla_init", self.p_ancilla_init)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.sigma_noise >= 0.0 && self.sigma_noise.is_finite()) {
            return Err(Error::invalid(format!("sigma_noise must be finite and >= 0, got {}", self.sigma_noise)));
        }
        if !self.i_low.is_finite() || !self.i_high.is_finite() {
            return Err(Error::invalid("sensor levels must be finite"));
        }
        if self.filter_samples == 0 {
            return Err(Error::invalid("filter_samples must be >= 1"));
        }
        if self.n_samples() == 0 {
            return Err(Error::invalid("trace_length is shorter than one sample"));
        }
        Ok(())
    }

    /// Samples per trace, `round(trace_length / dt_sample)`.
    pub fn n_samples(&self) -> usize {
        (self.trace_length / self.dt_sample).round() as usize
    }

    /// Probability that the ancilla bit differs from the logical state.
    pub fn composite_flip_probability(&self) -> f64 {
        let (a, b) = (self.p_crot_flip, self.p_ancilla_init);
        a * (1.0 - b) + b * (1.0 - a)
    }
}

/// `f64` fields that may be `+inf`, written as the string `"inf"` in JSON.
pub mod extended_f64 {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(D::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}
