//! Layered feed-forward spiking network with eligibility-trace STDP and
//! reward-gated weight updates. One network instance backs one simulation
//! run's decision module.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{encode_rate, encode_temporal, EncoderMode};
use super::lif::{lif_step, LifParams, NeuronState};
use super::stdp::{StdpParams, Synapse};
use super::{FeatureVector, SnnError};
use crate::model::OffloadDecision;

/// Everything needed to build the decision network; all fields carry
/// defaults so a scenario file can override selectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnnConfig {
    pub lif: LifParams,
    pub stdp: StdpParams,
    /// Hidden layer width.
    pub hidden: usize,
    /// Decision window length, seconds of simulated time per decision.
    pub window_s: f64,
    /// Peak input rate for rate coding, Hz.
    pub f_max_hz: f64,
    pub encoder: EncoderMode,
    /// Post-synaptic current injected per unit weight while a pulse is
    /// active, nA.
    pub gain_na: f64,
    /// Duration of the current pulse caused by one spike, seconds.
    pub pulse_s: f64,
    /// Initial weights are drawn uniformly from this fraction range of
    /// w_max.
    pub w_init_frac: (f64, f64),
}

impl Default for SnnConfig {
    fn default() -> Self {
        Self {
            lif: LifParams::default(),
            stdp: StdpParams::default(),
            hidden: 16,
            window_s: 0.050,
            f_max_hz: 200.0,
            encoder: EncoderMode::DeterministicRate,
            gain_na: 2.0,
            pulse_s: 0.001,
            w_init_frac: (0.4, 0.6),
        }
    }
}

impl SnnConfig {
    pub fn validate(&self) -> Result<(), SnnError> {
        self.lif.validate()?;
        self.stdp.validate()?;
        let ok = self.window_s > 0.0
            && self.f_max_hz > 0.0
            && self.gain_na > 0.0
            && self.pulse_s > 0.0
            && self.hidden > 0
            && self.w_init_frac.0 <= self.w_init_frac.1;
        if ok {
            Ok(())
        } else {
            Err(SnnError::InvalidParams(
                "SNN config requires positive window, f_max, gain, pulse and hidden width".into(),
            ))
        }
    }
}

/// Spike counts observed during one decision window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowOutcome {
    pub local_spikes: u32,
    pub cloud_spikes: u32,
    /// All spikes in the network, inputs included; drives the
    /// spike-proportional decision energy model.
    pub total_spikes: u64,
}

/// Argmax readout over the two output neurons; ties go Local.
pub fn decide(local_spikes: u32, cloud_spikes: u32) -> OffloadDecision {
    if cloud_spikes > local_spikes {
        OffloadDecision::Cloud
    } else {
        OffloadDecision::Local
    }
}

/// A dense feed-forward LIF network. The first layer consists of spike
/// generators driven by the encoder; subsequent layers integrate pulsed
/// synaptic currents. Eligibility traces accumulate pair-rule STDP during
/// a window and are only turned into weight changes by an explicit reward.
#[derive(Debug, Clone)]
pub struct SpikingNetwork {
    cfg: SnnConfig,
    /// Neuron count per layer, first = inputs, last = outputs.
    layers: Vec<usize>,
    /// Global index of each layer's first neuron.
    layer_offset: Vec<usize>,
    /// Synapse index of each inter-layer block's first entry.
    block_offset: Vec<usize>,
    neurons: Vec<NeuronState>,
    synapses: Vec<Synapse>,
    traces_armed: bool,
}

impl SpikingNetwork {
    /// Standard decision network: one input per feature, one hidden layer,
    /// two outputs (Local, Cloud).
    pub fn new<R: Rng>(cfg: SnnConfig, rng: &mut R) -> Result<Self, SnnError> {
        let layers = vec![FeatureVector::COUNT, cfg.hidden, 2];
        Self::with_layers(cfg, layers, rng)
    }

    /// Network with explicit layer sizes; used by tests for minimal
    /// constructions.
    pub fn with_layers<R: Rng>(
        cfg: SnnConfig,
        layers: Vec<usize>,
        rng: &mut R,
    ) -> Result<Self, SnnError> {
        cfg.lif.validate()?;
        cfg.stdp.validate()?;
        if layers.len() < 2 || layers.iter().any(|&n| n == 0) {
            return Err(SnnError::InvalidParams(
                "network needs at least two non-empty layers".into(),
            ));
        }

        let mut layer_offset = Vec::with_capacity(layers.len());
        let mut total_neurons = 0usize;
        for &n in &layers {
            layer_offset.push(total_neurons);
            total_neurons += n;
        }

        let (lo, hi) = cfg.w_init_frac;
        let w_lo = lo * cfg.stdp.w_max;
        let w_hi = hi * cfg.stdp.w_max;
        let mut block_offset = Vec::with_capacity(layers.len() - 1);
        let mut synapses = Vec::new();
        for l in 0..layers.len() - 1 {
            block_offset.push(synapses.len());
            for pre_local in 0..layers[l] {
                for post_local in 0..layers[l + 1] {
                    let w = if w_lo == w_hi { w_lo } else { rng.gen_range(w_lo..w_hi) };
                    synapses.push(Synapse {
                        pre: (layer_offset[l] + pre_local) as u32,
                        post: (layer_offset[l + 1] + post_local) as u32,
                        w: w.clamp(cfg.stdp.w_min, cfg.stdp.w_max),
                        eligibility: 0.0,
                    });
                }
            }
        }

        let neurons = vec![NeuronState::resting(&cfg.lif); total_neurons];
        Ok(Self {
            cfg,
            layers,
            layer_offset,
            block_offset,
            neurons,
            synapses,
            traces_armed: false,
        })
    }

    pub fn config(&self) -> &SnnConfig {
        &self.cfg
    }

    pub fn window_s(&self) -> f64 {
        self.cfg.window_s
    }

    pub fn synapse_count(&self) -> usize {
        self.synapses.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.synapses.iter().map(|s| s.w).collect()
    }

    /// Overwrite every weight; test helper for hand-built networks.
    pub fn set_uniform_weight(&mut self, w: f64) {
        for syn in &mut self.synapses {
            syn.w = w.clamp(self.cfg.stdp.w_min, self.cfg.stdp.w_max);
        }
    }

    pub fn eligibility_snapshot(&self) -> Vec<f64> {
        self.synapses.iter().map(|s| s.eligibility).collect()
    }

    /// Re-arms the eligibility traces from a snapshot taken after an
    /// earlier window, so a delayed reward credits the decision that
    /// actually produced it.
    pub fn load_eligibility(&mut self, trace: &[f64]) -> Result<(), SnnError> {
        if trace.len() != self.synapses.len() {
            return Err(SnnError::InvalidParams(format!(
                "eligibility snapshot has {} entries, network has {} synapses",
                trace.len(),
                self.synapses.len()
            )));
        }
        for (syn, &e) in self.synapses.iter_mut().zip(trace) {
            syn.eligibility = e;
        }
        self.traces_armed = true;
        Ok(())
    }

    pub fn spike_count_of(&self, layer: usize, index: usize) -> u32 {
        self.neurons[self.layer_offset[layer] + index].spike_count
    }

    /// Range of synapse indices leaving local neuron `pre_local` of layer
    /// `l` (towards layer `l + 1`).
    fn outgoing(&self, l: usize, pre_local: usize) -> std::ops::Range<usize> {
        let width = self.layers[l + 1];
        let start = self.block_offset[l] + pre_local * width;
        start..start + width
    }

    /// Simulates one decision window driven by the encoded features.
    /// Membrane state, spike counters and eligibility traces start from
    /// zero so the outcome depends only on (weights, features, rng).
    pub fn run_window<R: Rng>(
        &mut self,
        features: &FeatureVector,
        rng: &mut R,
    ) -> Result<WindowOutcome, SnnError> {
        let n_in = self.layers[0];
        let values = features.as_array();
        if values.len() != n_in {
            return Err(SnnError::InvalidParams(format!(
                "expected {} features, got {}",
                n_in,
                values.len()
            )));
        }

        let dt = self.cfg.lif.dt;
        let n_steps = (self.cfg.window_s / dt).round() as usize;
        let pulse_steps = (self.cfg.pulse_s / dt).round().max(1.0) as usize;

        for s in &mut self.neurons {
            *s = NeuronState::resting(&self.cfg.lif);
        }
        for syn in &mut self.synapses {
            syn.eligibility = 0.0;
        }

        // Input spike schedule, one step-index list per input neuron.
        let mut input_schedule: Vec<Vec<usize>> = vec![Vec::new(); n_in];
        for (i, &x) in values.iter().enumerate() {
            let times = match self.cfg.encoder {
                EncoderMode::Temporal => vec![encode_temporal(x, self.cfg.window_s)?],
                mode => encode_rate(x, self.cfg.window_s, self.cfg.f_max_hz, mode, rng)?,
            };
            for t in times {
                let step = (t / dt).floor() as usize;
                if step < n_steps {
                    input_schedule[i].push(step);
                }
            }
        }

        let n_neurons = self.neurons.len();
        let mut i_in = vec![0.0f64; n_neurons];
        // Pulse expirations, ring-indexed by step.
        let ring = pulse_steps + 2;
        let mut expiries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ring];
        let mut pre_trace = vec![0.0f64; n_neurons];
        let mut post_trace = vec![0.0f64; n_neurons];
        let decay_pre = (-dt / self.cfg.stdp.tau_plus).exp();
        let decay_post = (-dt / self.cfg.stdp.tau_minus).exp();
        let decay_elig = (-dt / self.cfg.stdp.trace_decay_tau).exp();

        let mut spiking: Vec<usize> = Vec::with_capacity(n_neurons);
        let mut input_cursor = vec![0usize; n_in];
        let mut total_spikes = 0u64;

        for step in 0..n_steps {
            let now = step as f64 * dt;

            for (neuron, amp) in expiries[step % ring].drain(..) {
                i_in[neuron] -= amp;
            }
            for trace in pre_trace.iter_mut() {
                *trace *= decay_pre;
            }
            for trace in post_trace.iter_mut() {
                *trace *= decay_post;
            }
            for syn in &mut self.synapses {
                syn.eligibility *= decay_elig;
            }

            spiking.clear();
            for i in 0..n_in {
                let cursor = &mut input_cursor[i];
                let schedule = &input_schedule[i];
                let mut fired = false;
                while *cursor < schedule.len() && schedule[*cursor] == step {
                    *cursor += 1;
                    fired = true;
                }
                if fired {
                    let g = self.layer_offset[0] + i;
                    self.neurons[g].spike_count += 1;
                    spiking.push(g);
                }
            }
            for g in self.layer_offset[1]..n_neurons {
                if lif_step(&mut self.neurons[g], i_in[g], &self.cfg.lif, now) {
                    spiking.push(g);
                }
            }
            total_spikes += spiking.len() as u64;

            // Pair-rule eligibility. Traces are read before this step's
            // increments, so coincident pre/post pairs contribute zero.
            for &g in &spiking {
                let (layer, local) = self.locate(g);
                if layer + 1 < self.layers.len() {
                    for si in self.outgoing(layer, local) {
                        let post = self.synapses[si].post as usize;
                        self.synapses[si].eligibility -=
                            self.cfg.stdp.a_minus * post_trace[post];
                    }
                }
                if layer > 0 {
                    let width = self.layers[layer];
                    for pre_local in 0..self.layers[layer - 1] {
                        let si = self.block_offset[layer - 1] + pre_local * width + local;
                        let pre = self.synapses[si].pre as usize;
                        self.synapses[si].eligibility += self.cfg.stdp.a_plus * pre_trace[pre];
                    }
                }
            }
            for &g in &spiking {
                pre_trace[g] += 1.0;
                post_trace[g] += 1.0;
            }

            // Propagate pulses; they drive post-synaptic neurons starting
            // at the next step.
            if step + 1 < n_steps {
                for &g in &spiking {
                    let (layer, local) = self.locate(g);
                    if layer + 1 >= self.layers.len() {
                        continue;
                    }
                    for si in self.outgoing(layer, local) {
                        let amp = self.synapses[si].w * self.cfg.gain_na;
                        if amp == 0.0 {
                            continue;
                        }
                        let post = self.synapses[si].post as usize;
                        i_in[post] += amp;
                        expiries[(step + 1 + pulse_steps) % ring].push((post, amp));
                    }
                }
            }
        }

        self.traces_armed = true;
        let out_offset = *self.layer_offset.last().expect("layers nonempty");
        let n_out = *self.layers.last().expect("layers nonempty");
        Ok(WindowOutcome {
            local_spikes: self.neurons[out_offset].spike_count,
            cloud_spikes: if n_out > 1 {
                self.neurons[out_offset + 1].spike_count
            } else {
                0
            },
            total_spikes,
        })
    }

    fn locate(&self, global: usize) -> (usize, usize) {
        for (l, &off) in self.layer_offset.iter().enumerate().rev() {
            if global >= off {
                return (l, global - off);
            }
        }
        unreachable!("neuron index out of range")
    }

    /// Gates the accumulated eligibility by a scalar reward in [-1, 1] and
    /// folds it into the weights, clamped to [w_min, w_max]. Consumes the
    /// traces; calling again before they are re-armed is an error.
    pub fn apply_reward(&mut self, reward: f64) -> Result<(), SnnError> {
        if !self.traces_armed {
            return Err(SnnError::StaleTrace);
        }
        let p = self.cfg.stdp;
        for syn in &mut self.synapses {
            syn.w = (syn.w + p.learning_rate * reward * syn.eligibility).clamp(p.w_min, p.w_max);
            syn.eligibility = 0.0;
        }
        self.traces_armed = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn quiet_features() -> FeatureVector {
        FeatureVector::clamped(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    #[test]
    fn silent_input_produces_no_spikes() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(1)).unwrap();
        let out = net.run_window(&quiet_features(), &mut rng(2)).unwrap();
        assert_eq!(out.total_spikes, 0);
        assert_eq!((out.local_spikes, out.cloud_spikes), (0, 0));
        assert_eq!(decide(out.local_spikes, out.cloud_spikes), OffloadDecision::Local);
    }

    #[test]
    fn repeated_windows_are_identical() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(3)).unwrap();
        let f = FeatureVector::clamped(0.8, 0.3, 0.5, 0.9, 0.6);
        let a = net.run_window(&f, &mut rng(4)).unwrap();
        let b = net.run_window(&f, &mut rng(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn saturated_single_synapse_drives_output() {
        // One input wired straight to one output at w_max. The pulse
        // outlasts the inter-spike gap, so the drive is a sustained
        // current of gain_na * w_max = 10 nA; with r_m = 10 MΩ that is a
        // 100 mV asymptote against a 15 mV threshold gap, which crosses
        // within a couple of membrane time constants.
        let cfg = SnnConfig {
            gain_na: 10.0,
            pulse_s: 0.006,
            f_max_hz: 200.0,
            window_s: 0.050,
            ..SnnConfig::default()
        };
        let mut net = SpikingNetwork::with_layers(cfg, vec![1, 1], &mut rng(5)).unwrap();
        net.set_uniform_weight(1.0);
        let f = FeatureVector::clamped(1.0, 0.0, 0.0, 0.0, 0.0);
        let out = net.run_window(&f, &mut rng(6)).unwrap();
        assert!(out.local_spikes > 0, "output neuron never fired");
        assert!(out.total_spikes > u64::from(out.local_spikes));
    }

    #[test]
    fn causal_pairing_leaves_positive_eligibility() {
        let cfg = SnnConfig {
            gain_na: 10.0,
            pulse_s: 0.006,
            ..SnnConfig::default()
        };
        let mut net = SpikingNetwork::with_layers(cfg, vec![1, 1], &mut rng(7)).unwrap();
        net.set_uniform_weight(1.0);
        let f = FeatureVector::clamped(1.0, 0.0, 0.0, 0.0, 0.0);
        net.run_window(&f, &mut rng(8)).unwrap();
        let elig = net.eligibility_snapshot();
        assert!(elig[0] > 0.0, "post-follows-pre should potentiate, got {}", elig[0]);
    }

    #[test]
    fn refractory_period_limits_firing() {
        let cfg = SnnConfig {
            gain_na: 50.0,
            pulse_s: 0.050,
            ..SnnConfig::default()
        };
        let t_ref = cfg.lif.t_ref;
        let window = cfg.window_s;
        let mut net = SpikingNetwork::with_layers(cfg, vec![1, 1], &mut rng(9)).unwrap();
        net.set_uniform_weight(1.0);
        let f = FeatureVector::clamped(1.0, 0.0, 0.0, 0.0, 0.0);
        let out = net.run_window(&f, &mut rng(10)).unwrap();
        let max_by_refractory = (window / t_ref).ceil() as u32;
        assert!(out.local_spikes > 0);
        assert!(out.local_spikes <= max_by_refractory);
    }

    #[test]
    fn zero_reward_leaves_weights_unchanged() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(11)).unwrap();
        let before = net.weights();
        let f = FeatureVector::clamped(0.9, 0.9, 0.9, 0.9, 0.9);
        net.run_window(&f, &mut rng(12)).unwrap();
        net.apply_reward(0.0).unwrap();
        assert_eq!(net.weights(), before);
    }

    #[test]
    fn reward_scales_eligibility_into_weights() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(13)).unwrap();
        let lr = net.config().stdp.learning_rate;
        let before = net.weights();
        let mut elig = vec![0.0; net.synapse_count()];
        elig[3] = 0.5;
        net.load_eligibility(&elig).unwrap();
        net.apply_reward(1.0).unwrap();
        let after = net.weights();
        assert!((after[3] - (before[3] + lr * 0.5)).abs() < 1e-12);
        assert_eq!(after[0], before[0]);
    }

    #[test]
    fn weights_clamp_at_bounds() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(14)).unwrap();
        let w_max = net.config().stdp.w_max;
        net.set_uniform_weight(w_max);
        let elig = vec![10.0; net.synapse_count()];
        net.load_eligibility(&elig).unwrap();
        net.apply_reward(1.0).unwrap();
        assert!(net.weights().iter().all(|&w| w == w_max));
    }

    #[test]
    fn double_reward_without_rearming_is_stale() {
        let mut net = SpikingNetwork::new(SnnConfig::default(), &mut rng(15)).unwrap();
        let f = FeatureVector::clamped(0.5, 0.5, 0.5, 0.5, 0.5);
        net.run_window(&f, &mut rng(16)).unwrap();
        net.apply_reward(0.5).unwrap();
        assert!(matches!(net.apply_reward(0.5), Err(SnnError::StaleTrace)));
    }
}
