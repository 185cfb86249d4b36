//! Spike-timing-dependent plasticity: the pair rule and the synapse state
//! it acts on.

use serde::{Deserialize, Serialize};

use super::SnnError;

/// STDP and reward-modulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StdpParams {
    /// Potentiation amplitude for causal (pre before post) pairs.
    pub a_plus: f64,
    /// Depression amplitude for anti-causal pairs.
    pub a_minus: f64,
    /// Potentiation time constant, seconds.
    pub tau_plus: f64,
    /// Depression time constant, seconds.
    pub tau_minus: f64,
    pub w_min: f64,
    pub w_max: f64,
    /// Decay time constant of the per-synapse eligibility trace, seconds.
    pub trace_decay_tau: f64,
    /// Scales reward * eligibility when weights are updated.
    pub learning_rate: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self {
            a_plus: 0.01,
            a_minus: 0.01,
            tau_plus: 0.020,
            tau_minus: 0.020,
            w_min: 0.0,
            w_max: 1.0,
            trace_decay_tau: 0.1,
            learning_rate: 0.1,
        }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        let ok = self.a_plus > 0.0
            && self.a_minus > 0.0
            && self.tau_plus > 0.0
            && self.tau_minus > 0.0
            && self.trace_decay_tau > 0.0
            && self.w_min < self.w_max;
        if ok {
            Ok(())
        } else {
            Err(SnnError::InvalidParams(
                "STDP amplitudes and time constants must be positive and w_min < w_max".into(),
            ))
        }
    }
}

/// A plastic feed-forward connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synapse {
    pub pre: u32,
    pub post: u32,
    pub w: f64,
    /// Accumulated, reward-gated STDP credit for the current decision.
    pub eligibility: f64,
}

/// Pair-rule weight change for a post-minus-pre spike time difference.
/// Positive differences potentiate, negative depress, coincidence is zero.
pub fn stdp_delta(dt_pre_post: f64, params: &StdpParams) -> f64 {
    if dt_pre_post > 0.0 {
        params.a_plus * (-dt_pre_post / params.tau_plus).exp()
    } else if dt_pre_post < 0.0 {
        -params.a_minus * (dt_pre_post / params.tau_minus).exp()
    } else {
        0.0
    }
}
