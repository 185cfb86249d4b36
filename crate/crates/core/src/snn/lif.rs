//! Leaky integrate-and-fire neuron dynamics.

use serde::{Deserialize, Serialize};

use super::SnnError;

/// LIF membrane parameters. Voltages in mV, currents in nA, resistance in
/// MΩ, times in seconds; `r_m * i` is then directly a voltage in mV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifParams {
    /// Membrane time constant, seconds.
    pub tau_m: f64,
    /// Resting potential, mV.
    pub v_rest: f64,
    /// Post-spike reset potential, mV.
    pub v_reset: f64,
    /// Firing threshold, mV.
    pub v_th: f64,
    /// Membrane resistance, MΩ.
    pub r_m: f64,
    /// Absolute refractory period, seconds.
    pub t_ref: f64,
    /// Euler integration step, seconds.
    pub dt: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau_m: 0.010,
            v_rest: -65.0,
            v_reset: -70.0,
            v_th: -50.0,
            r_m: 10.0,
            t_ref: 0.002,
            dt: 0.0001,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<(), SnnError> {
        let ok = self.v_reset <= self.v_rest
            && self.v_rest < self.v_th
            && self.tau_m > 0.0
            && self.dt > 0.0
            && self.dt <= self.tau_m / 10.0
            && self.t_ref >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SnnError::InvalidParams(
                "LIF parameters must satisfy v_reset <= v_rest < v_th, tau_m > 0, \
                 0 < dt <= tau_m/10, t_ref >= 0"
                    .into(),
            ))
        }
    }
}

/// Mutable state of one neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    /// Membrane potential, mV.
    pub v: f64,
    /// Absolute time until which the neuron ignores input, seconds.
    pub refractory_until: f64,
    /// Spikes emitted in the current decision window.
    pub spike_count: u32,
}

impl NeuronState {
    pub fn resting(params: &LifParams) -> Self {
        Self {
            v: params.v_rest,
            refractory_until: 0.0,
            spike_count: 0,
        }
    }
}

/// One forward-Euler step of the membrane equation. Returns whether the
/// neuron fired during this step; on firing the potential is reset and the
/// refractory clock started.
pub fn lif_step(state: &mut NeuronState, i_in_na: f64, params: &LifParams, now: f64) -> bool {
    if now < state.refractory_until {
        return false;
    }
    let dv = (params.dt / params.tau_m) * ((params.v_rest - state.v) + params.r_m * i_in_na);
    state.v += dv;
    if state.v >= params.v_th {
        state.v = params.v_reset;
        state.refractory_until = now + params.t_ref;
        state.spike_count += 1;
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resting_potential_is_a_fixed_point() {
        let p = LifParams::default();
        let mut s = NeuronState::resting(&p);
        for _ in 0..100 {
            assert!(!lif_step(&mut s, 0.0, &p, 0.0));
        }
        assert_eq!(s.v, p.v_rest);
    }

    #[test]
    fn free_decay_single_step() {
        // One Euler step from v_rest + 10 mV with dt = 1 ms, tau = 10 ms
        // leaks exactly one tenth of the offset.
        let p = LifParams {
            dt: 0.001,
            tau_m: 0.010,
            ..LifParams::default()
        };
        let mut s = NeuronState::resting(&p);
        s.v = p.v_rest + 10.0;
        lif_step(&mut s, 0.0, &p, 0.0);
        assert!((s.v - (p.v_rest + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn threshold_crossing_resets_and_counts() {
        let p = LifParams::default();
        let mut s = NeuronState::resting(&p);
        s.v = p.v_th - 1e-9;
        let spiked = lif_step(&mut s, 1e3, &p, 0.5);
        assert!(spiked);
        assert_eq!(s.v, p.v_reset);
        assert_eq!(s.spike_count, 1);
        assert_eq!(s.refractory_until, 0.5 + p.t_ref);
    }

    #[test]
    fn refractory_blocks_integration() {
        let p = LifParams::default();
        let mut s = NeuronState::resting(&p);
        s.refractory_until = 1.0;
        lif_step(&mut s, 1e3, &p, 0.5);
        assert_eq!(s.v, p.v_rest);
        assert_eq!(s.spike_count, 0);
    }

    #[test]
    fn dt_bound_is_enforced() {
        let p = LifParams {
            dt: 0.002,
            tau_m: 0.010,
            ..LifParams::default()
        };
        assert!(p.validate().is_err());
        assert!(LifParams::default().validate().is_ok());
    }
}
