//! Dopamine reward prediction error.
//!
//! Negative-emotion spikes inhibit a tonically driven dopamine population. Its
//! rate, normalised to the uninhibited rate, is the signal `S(t)` fed to a
//! running predictor `P(t)`:
//!
//! ```text
//! delta(t)  = S(t) - P(t)
//! DA(t)     = alpha * delta(t)
//! P(t + 1)  = P(t) + beta * delta(t)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::snn::{current_for_rate, LifParameters, NeuronPopulation, SpikeTrain, SynapseSign, SynapticMatrix};

pub const DOPAMINE_POP_ID: u16 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RpePredictor {
    pub prediction: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RpePredictor {
    fn default() -> Self {
        Self {
            prediction: 0.0,
            alpha: 30.0,
            beta: 0.2,
        }
    }
}

impl RpePredictor {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            prediction: 0.0,
            alpha,
            beta,
        }
    }

    /// Returns `DA = alpha * (s - P)` and moves `P` a fraction `beta` towards `s`.
    pub fn update(&mut self, s: f64) -> f64 {
        let delta = s - self.prediction;
        self.prediction += self.beta * delta;
        self.alpha * delta
    }

    pub fn reset(&mut self) {
        self.prediction = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DopamineParams {
    pub neurons: usize,
    pub lif: LifParameters,
    pub baseline_rate_hz: f64,
    pub drive_jitter: f64,
    /// Current removed per unit weight per negative-emotion spike.
    pub inhibition_gain: f64,
    /// ms
    pub synaptic_time_constant: f64,
    pub seed: u64,
}

impl Default for DopamineParams {
    fn default() -> Self {
        Self {
            neurons: 20,
            lif: LifParameters::default(),
            baseline_rate_hz: 40.0,
            drive_jitter: 0.1,
            inhibition_gain: 0.01,
            synaptic_time_constant: 20.0,
            seed: 0,
        }
    }
}

impl DopamineParams {
    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        if self.neurons == 0 {
            return Err(Error::param("neurons", "must be >= 1"));
        }
        for (name, v) in [
            ("baseline_rate_hz", self.baseline_rate_hz),
            ("inhibition_gain", self.inhibition_gain),
            ("synaptic_time_constant", self.synaptic_time_constant),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.drive_jitter) {
            return Err(Error::param("drive_jitter", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Dopamine population under inhibition from the negative-emotion sub-group.
#[derive(Debug, Clone)]
pub struct DopamineCircuit {
    pub params: DopamineParams,
    pub da_pop: NeuronPopulation,
    pub baseline_drive: f64,
    /// Negative-emotion neurons x dopamine neurons.
    pub w_emotion_da: SynapticMatrix,
    drive_gains: Vec<f64>,
}

impl DopamineCircuit {
    pub fn new(params: DopamineParams, emotion_neurons: usize) -> Result<Self> {
        params.validate()?;
        if emotion_neurons == 0 {
            return Err(Error::param("emotion_neurons", "must be >= 1"));
        }
        let mut rng = stream(params.seed, "dopamine", 0);
        let j = params.drive_jitter;
        Ok(Self {
            params,
            da_pop: NeuronPopulation::new(DOPAMINE_POP_ID, params.neurons, params.lif)?,
            baseline_drive: current_for_rate(&params.lif, params.baseline_rate_hz),
            w_emotion_da: SynapticMatrix::new(emotion_neurons, params.neurons, SynapseSign::Inhibitory, -1.0)?,
            drive_gains: (0..params.neurons).map(|_| 1.0 + rng.random_range(-j..=j)).collect(),
        })
    }

    /// Mean dopamine rate (Hz) over `[0, window_ms)` while `emotion` spikes arrive.
    ///
    /// `emotion` holds one train per negative-emotion neuron, in order.
    pub fn measure_da_rate_hz(&self, emotion: &[SpikeTrain], window_ms: f64) -> Result<f64> {
        if window_ms.is_nan() || window_ms <= 0.0 {
            return Err(Error::EmptyWindow { t0: 0.0, t1: window_ms });
        }
        if emotion.len() != self.w_emotion_da.pre_size() {
            return Err(Error::ShapeMismatch {
                expected: (self.w_emotion_da.pre_size(), 1),
                actual: (emotion.len(), 1),
            });
        }
        let p = &self.params;
        let mut pop = self.da_pop.clone();
        pop.reset_state();
        let n = p.neurons;
        let decay = (-p.lif.dt / p.synaptic_time_constant).exp();
        let steps = (window_ms / p.lif.dt).round() as usize;
        // Spikes per step, bucketed once.
        let mut arrivals: Vec<Vec<usize>> = vec![Vec::new(); steps + 1];
        for (i, train) in emotion.iter().enumerate() {
            for &t in &train.spike_times {
                let k = (t / p.lif.dt).round() as usize;
                if k < steps {
                    arrivals[k].push(i);
                }
            }
        }
        let mut syn = vec![0.0; n];
        let mut input = vec![0.0; n];
        let mut spikes = Vec::new();
        let mut count = 0usize;
        for arrived in arrivals.iter().take(steps) {
            syn.iter_mut().for_each(|c| *c *= decay);
            self.w_emotion_da.propagate(arrived, p.inhibition_gain, &mut syn);
            for ((inp, s), g) in input.iter_mut().zip(&syn).zip(&self.drive_gains) {
                *inp = self.baseline_drive * g + s;
            }
            spikes.clear();
            pop.step_into(&input, &mut spikes)?;
            count += spikes.len();
        }
        Ok(count as f64 / n as f64 / (window_ms / 1000.0))
    }

    /// Rate with no emotion input (Hz).
    pub fn baseline_hz(&self, window_ms: f64) -> Result<f64> {
        let silent = vec![SpikeTrain::default(); self.w_emotion_da.pre_size()];
        self.measure_da_rate_hz(&silent, window_ms)
    }

    /// `S(t)`: rate under `emotion` divided by the uninhibited rate.
    pub fn measure_da_rate(&self, emotion: &[SpikeTrain], window_ms: f64) -> Result<f64> {
        let base = self.baseline_hz(window_ms)?;
        if base <= 0.0 {
            return Err(Error::param(
                "baseline_rate_hz",
                "dopamine population is silent without inhibition",
            ));
        }
        Ok(self.measure_da_rate_hz(emotion, window_ms)? / base)
    }
}

/// Relief dopamine once the predictor has fully adapted to sustained distress:
/// `alpha * (1 - S_distress)`.
pub fn peak_relief_da(alpha: f64, s_distress: f64) -> f64 {
    alpha * (1.0 - s_distress)
}
