//! Clock-driven leaky integrate-and-fire populations.
//!
//! Membrane update (explicit Euler, one call per `dt`):
//!
//! ```text
//! V <- V + dt / tau_m * ( -(V - V_rest) + R * I )
//! ```
//!
//! A neuron whose potential reaches `threshold` emits a spike stamped with the
//! end-of-step time, is clamped to `reset_potential` and ignores input until
//! `refractory_period` has elapsed since that spike.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifParameters {
    /// ms
    pub membrane_time_constant: f64,
    pub resting_potential: f64,
    pub threshold: f64,
    pub reset_potential: f64,
    /// ms
    pub refractory_period: f64,
    /// ms
    pub dt: f64,
    pub membrane_resistance: f64,
}

impl Default for LifParameters {
    fn default() -> Self {
        Self {
            membrane_time_constant: 20.0,
            resting_potential: 0.0,
            threshold: 1.0,
            reset_potential: 0.0,
            refractory_period: 2.0,
            dt: 1.0,
            membrane_resistance: 1.0,
        }
    }
}

impl LifParameters {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.membrane_time_constant,
            self.resting_potential,
            self.threshold,
            self.reset_potential,
            self.refractory_period,
            self.dt,
            self.membrane_resistance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("lif", "all LIF parameters must be finite"));
        }
        if self.membrane_time_constant <= 0.0 {
            return Err(Error::param("membrane_time_constant", "must be > 0"));
        }
        if self.threshold <= self.resting_potential {
            return Err(Error::param("threshold", "must exceed the resting potential"));
        }
        if self.reset_potential > self.resting_potential {
            return Err(Error::param("reset_potential", "must not exceed the resting potential"));
        }
        if self.dt <= 0.0 {
            return Err(Error::param("dt", "must be > 0"));
        }
        if self.refractory_period < 0.0 {
            return Err(Error::param("refractory_period", "must be >= 0"));
        }
        Ok(())
    }

    /// Membrane potential after one Euler step from `v` under constant current `current`.
    pub fn euler_step(&self, v: f64, current: f64) -> f64 {
        v + self.dt / self.membrane_time_constant * (-(v - self.resting_potential) + self.membrane_resistance * current)
    }
}

/// A homogeneous group of LIF neurons sharing one clock.
#[derive(Debug, Clone)]
pub struct NeuronPopulation {
    id: u16,
    params: LifParameters,
    potentials: Vec<f64>,
    last_spike_times: Vec<Option<f64>>,
    is_inhibitory: bool,
    time: f64,
}

impl NeuronPopulation {
    pub fn new(id: u16, size: usize, params: LifParameters) -> Result<Self> {
        params.validate()?;
        if size == 0 {
            return Err(Error::param("size", "population needs at least one neuron"));
        }
        Ok(Self {
            id,
            params,
            potentials: vec![params.resting_potential; size],
            last_spike_times: vec![None; size],
            is_inhibitory: false,
            time: 0.0,
        })
    }

    pub fn inhibitory(mut self) -> Self {
        self.is_inhibitory = true;
        self
    }

    pub fn id(&self) -> u16 {
        self.id
    }

    pub fn size(&self) -> usize {
        self.potentials.len()
    }

    pub fn params(&self) -> &LifParameters {
        &self.params
    }

    pub fn is_inhibitory(&self) -> bool {
        self.is_inhibitory
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    pub fn last_spike_times(&self) -> &[Option<f64>] {
        &self.last_spike_times
    }

    /// Current simulation time (ms), i.e. the end of the last completed step.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Returns every neuron to rest and forgets refractory state; the clock keeps running.
    pub fn reset_state(&mut self) {
        self.potentials.fill(self.params.resting_potential);
        self.last_spike_times.fill(None);
    }

    /// Advances the population by one `dt`, appending the indices of neurons that
    /// fired to `spikes`. Spike times equal [`Self::time`] after the call.
    pub fn step_into(&mut self, input_current: &[f64], spikes: &mut Vec<usize>) -> Result<()> {
        if input_current.len() != self.potentials.len() {
            return Err(Error::ShapeMismatch {
                expected: (self.potentials.len(), 1),
                actual: (input_current.len(), 1),
            });
        }
        if let Some((neuron, &value)) = input_current.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { neuron, value });
        }
        let p = self.params;
        let now = self.time + p.dt;
        // Half a tick of slack keeps the refractory comparison robust to float drift.
        let eps = 1e-9 * p.dt;
        for (i, (v, &current)) in self.potentials.iter_mut().zip(input_current).enumerate() {
            if let Some(last) = self.last_spike_times[i] {
                if now - last < p.refractory_period - eps {
                    *v = p.reset_potential;
                    continue;
                }
            }
            *v = p.euler_step(*v, current);
            if *v >= p.threshold {
                *v = p.reset_potential;
                self.last_spike_times[i] = Some(now);
                spikes.push(i);
            }
        }
        self.time = now;
        Ok(())
    }

    pub fn step(&mut self, input_current: &[f64]) -> Result<Vec<usize>> {
        let mut spikes = Vec::new();
        self.step_into(input_current, &mut spikes)?;
        Ok(spikes)
    }
}

/// Constant current that makes an isolated neuron fire at `rate_hz` under the
/// continuous-time LIF solution (refractory period included).
pub fn current_for_rate(params: &LifParameters, rate_hz: f64) -> f64 {
    let isi = 1000.0 / rate_hz - params.refractory_period;
    let k = (-isi / params.membrane_time_constant).exp();
    // V(t) = V_inf + (V_reset - V_inf) e^{-t/tau}; solve V(isi) = threshold for V_inf.
    let v_inf = (params.threshold - params.reset_potential * k) / (1.0 - k);
    (v_inf - params.resting_potential) / params.membrane_resistance
}
