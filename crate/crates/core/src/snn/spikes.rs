use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spike times of one neuron, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub neuron_index: usize,
    pub spike_times: Vec<f64>,
}

impl SpikeTrain {
    pub fn new(neuron_index: usize, spike_times: Vec<f64>) -> Self {
        debug_assert!(spike_times.windows(2).all(|w| w[0] < w[1]));
        Self {
            neuron_index,
            spike_times,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.spike_times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.spike_times.len()
    }

    /// Number of spikes with `t0 <= t < t1`.
    pub fn count_in(&self, t0: f64, t1: f64) -> usize {
        let lo = self.spike_times.partition_point(|&t| t < t0);
        let hi = self.spike_times.partition_point(|&t| t < t1);
        hi - lo
    }

    /// The same train restricted to `t0 <= t < t1`.
    pub fn window(&self, t0: f64, t1: f64) -> SpikeTrain {
        let lo = self.spike_times.partition_point(|&t| t < t0);
        let hi = self.spike_times.partition_point(|&t| t < t1);
        SpikeTrain::new(self.neuron_index, self.spike_times[lo..hi].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub time_ms: f64,
    pub population_id: u16,
    pub neuron_index: usize,
}

/// Append-only record of every spike emitted during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeLog {
    events: Vec<SpikeEvent>,
}

impl SpikeLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, time_ms: f64, population_id: u16, neurons: &[usize]) {
        self.events.extend(neurons.iter().map(|&neuron_index| SpikeEvent {
            time_ms,
            population_id,
            neuron_index,
        }));
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn clear(&mut self) {
        self.events.clear();
    }

    /// Per-neuron trains for population `population_id` of `size` neurons.
    pub fn trains(&self, population_id: u16, size: usize) -> Vec<SpikeTrain> {
        let mut trains: Vec<SpikeTrain> = (0..size).map(|i| SpikeTrain::new(i, Vec::new())).collect();
        for e in self.events.iter().filter(|e| e.population_id == population_id) {
            if let Some(train) = trains.get_mut(e.neuron_index) {
                train.spike_times.push(e.time_ms);
            }
        }
        trains
    }

    /// CSV with header `time_ms,population_id,neuron_index`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_ms,population_id,neuron_index\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{},{}", e.time_ms, e.population_id, e.neuron_index);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiringRate {
    /// Spikes per neuron inside the window.
    pub per_neuron: Vec<usize>,
    /// Total spikes divided by population size.
    pub population_mean: f64,
}

impl FiringRate {
    /// Mean rate in Hz for a window of `window_ms`.
    pub fn hz(&self, window_ms: f64) -> f64 {
        self.population_mean * 1000.0 / window_ms
    }
}

/// Spike counts in `[t0, t1)` for each train, and their population mean.
pub fn firing_rate(trains: &[SpikeTrain], t0: f64, t1: f64) -> Result<FiringRate> {
    if t0.is_nan() || t1.is_nan() || t1 <= t0 {
        return Err(Error::EmptyWindow { t0, t1 });
    }
    let per_neuron: Vec<usize> = trains.iter().map(|t| t.count_in(t0, t1)).collect();
    let population_mean = if per_neuron.is_empty() {
        0.0
    } else {
        per_neuron.iter().sum::<usize>() as f64 / per_neuron.len() as f64
    };
    Ok(FiringRate {
        per_neuron,
        population_mean,
    })
}
