//! Spike encoders turning normalized analog features into spike trains.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::SnnError;

/// How a normalized feature value becomes spikes within a decision window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    /// `floor(x * f_max * window)` spikes, evenly spaced starting at 0.
    DeterministicRate,
    /// Homogeneous Poisson train at rate `x * f_max`.
    PoissonRate,
    /// A single spike at `window * (1 - x)`; larger values spike earlier.
    Temporal,
}

fn check_unit_range(x: f64) -> Result<(), SnnError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(SnnError::Domain(format!("encoder input {x} outside [0,1]")))
    }
}

/// Rate-codes `x` into spike times within `[0, window)`.
pub fn encode_rate<R: Rng>(
    x: f64,
    window: f64,
    f_max: f64,
    mode: EncoderMode,
    rng: &mut R,
) -> Result<Vec<f64>, SnnError> {
    check_unit_range(x)?;
    match mode {
        EncoderMode::DeterministicRate => {
            let n = (x * f_max * window).floor() as usize;
            let mut spikes = Vec::with_capacity(n);
            for k in 0..n {
                spikes.push(k as f64 * window / n as f64);
            }
            Ok(spikes)
        }
        EncoderMode::PoissonRate => {
            let rate = x * f_max;
            let mut spikes = Vec::new();
            if rate > 0.0 {
                let exp = Exp::new(rate).expect("positive rate");
                let mut t = exp.sample(rng);
                while t < window {
                    spikes.push(t);
                    t += exp.sample(rng);
                }
            }
            Ok(spikes)
        }
        EncoderMode::Temporal => Ok(vec![encode_temporal(x, window)?]),
    }
}

/// Latency-codes `x` as a single spike time. `x = 1` spikes at 0, `x = 0`
/// at `window` (which falls outside the simulated window and is dropped by
/// the network).
pub fn encode_temporal(x: f64, window: f64) -> Result<f64, SnnError> {
    check_unit_range(x)?;
    Ok(window * (1.0 - x))
}
