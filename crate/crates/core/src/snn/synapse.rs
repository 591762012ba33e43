use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynapseSign {
    Excitatory,
    Inhibitory,
}

impl SynapseSign {
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            SynapseSign::Excitatory => (0.0, 5.0),
            SynapseSign::Inhibitory => (-5.0, 0.0),
        }
    }
}

/// Dense pre x post weight matrix, row-major by presynaptic neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynapticMatrix {
    pre_size: usize,
    post_size: usize,
    weights: Vec<f64>,
    weight_bounds: (f64, f64),
    sign: SynapseSign,
}

impl SynapticMatrix {
    pub fn new(pre_size: usize, post_size: usize, sign: SynapseSign, initial: f64) -> Result<Self> {
        Self::with_bounds(pre_size, post_size, sign, sign.default_bounds(), initial)
    }

    pub fn with_bounds(
        pre_size: usize,
        post_size: usize,
        sign: SynapseSign,
        weight_bounds: (f64, f64),
        initial: f64,
    ) -> Result<Self> {
        let (lo, hi) = weight_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::param("weight_bounds", format!("invalid bounds [{lo}, {hi}]")));
        }
        match sign {
            SynapseSign::Excitatory if lo < 0.0 => {
                return Err(Error::param("weight_bounds", "excitatory weights must be non-negative"))
            }
            SynapseSign::Inhibitory if hi > 0.0 => {
                return Err(Error::param("weight_bounds", "inhibitory weights must be non-positive"))
            }
            _ => {}
        }
        if pre_size == 0 || post_size == 0 {
            return Err(Error::param("size", "synaptic matrix dimensions must be >= 1"));
        }
        Ok(Self {
            pre_size,
            post_size,
            weights: vec![initial.clamp(lo, hi); pre_size * post_size],
            weight_bounds,
            sign,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.pre_size, self.post_size)
    }

    pub fn pre_size(&self) -> usize {
        self.pre_size
    }

    pub fn post_size(&self) -> usize {
        self.post_size
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.weight_bounds
    }

    pub fn sign(&self) -> SynapseSign {
        self.sign
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, pre: usize, post: usize) -> f64 {
        self.weights[pre * self.post_size + post]
    }

    /// Sets one weight, clipped to the bounds.
    pub fn set(&mut self, pre: usize, post: usize, w: f64) {
        let (lo, hi) = self.weight_bounds;
        self.weights[pre * self.post_size + post] = w.clamp(lo, hi);
    }

    pub fn row(&self, pre: usize) -> &[f64] {
        &self.weights[pre * self.post_size..(pre + 1) * self.post_size]
    }

    pub fn row_mut(&mut self, pre: usize) -> &mut [f64] {
        &mut self.weights[pre * self.post_size..(pre + 1) * self.post_size]
    }

    /// Adds `delta` to every weight, then clips.
    pub fn add_clipped(&mut self, delta: &[f64]) -> Result<()> {
        if delta.len() != self.weights.len() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: (delta.len(), 1),
            });
        }
        let (lo, hi) = self.weight_bounds;
        for (w, d) in self.weights.iter_mut().zip(delta) {
            *w = (*w + d).clamp(lo, hi);
        }
        Ok(())
    }

    pub fn clip(&mut self) {
        let (lo, hi) = self.weight_bounds;
        for w in &mut self.weights {
            *w = w.clamp(lo, hi);
        }
    }

    /// Adds `gain * w[pre, :]` to `current` for every presynaptic neuron in `pre_spikes`.
    pub fn propagate(&self, pre_spikes: &[usize], gain: f64, current: &mut [f64]) {
        debug_assert_eq!(current.len(), self.post_size);
        for &pre in pre_spikes {
            for (c, w) in current.iter_mut().zip(self.row(pre)) {
                *c += gain * w;
            }
        }
    }

    /// Sum of all weights in the block `pre_range x post_range`.
    pub fn block_sum(&self, pre_range: std::ops::Range<usize>, post_range: std::ops::Range<usize>) -> f64 {
        pre_range
            .map(|pre| self.row(pre)[post_range.clone()].iter().sum::<f64>())
            .sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceDecay {
    /// `e <- e - e * dt / tau_e + stdp`
    #[default]
    Euler,
    /// `e <- e * exp(-dt / tau_e) + stdp`
    Exponential,
}

/// Per-synapse eligibility, congruent with one [`SynapticMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EligibilityTrace {
    pre_size: usize,
    post_size: usize,
    traces: Vec<f64>,
    /// ms
    pub tau_e: f64,
    pub decay: TraceDecay,
}

impl EligibilityTrace {
    pub fn new(pre_size: usize, post_size: usize, tau_e: f64) -> Self {
        Self {
            pre_size,
            post_size,
            traces: vec![0.0; pre_size * post_size],
            tau_e,
            decay: TraceDecay::Euler,
        }
    }

    pub fn for_matrix(weights: &SynapticMatrix, tau_e: f64) -> Self {
        Self::new(weights.pre_size, weights.post_size, tau_e)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.pre_size, self.post_size)
    }

    pub fn values(&self) -> &[f64] {
        &self.traces
    }

    #[inline]
    pub fn get(&self, pre: usize, post: usize) -> f64 {
        self.traces[pre * self.post_size + post]
    }

    /// Multiplicative factor applied to every element per step of length `dt`.
    pub fn decay_factor(&self, dt: f64) -> f64 {
        match self.decay {
            TraceDecay::Euler => 1.0 - dt / self.tau_e,
            TraceDecay::Exponential => (-dt / self.tau_e).exp(),
        }
    }

    /// One step of `de = -e / tau_e + stdp`.
    pub fn update(&mut self, stdp_contribution: &[f64], dt: f64) -> Result<()> {
        if stdp_contribution.len() != self.traces.len() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                actual: (stdp_contribution.len(), 1),
            });
        }
        let k = self.decay_factor(dt);
        for (e, s) in self.traces.iter_mut().zip(stdp_contribution) {
            *e = *e * k + s;
        }
        Ok(())
    }

    /// Decay step with STDP input only on `pre`'s row (all other rows receive zero).
    pub fn update_row(&mut self, pre: usize, row_contribution: &[f64], dt: f64) -> Result<()> {
        if row_contribution.len() != self.post_size || pre >= self.pre_size {
            return Err(Error::ShapeMismatch {
                expected: (1, self.post_size),
                actual: (1, row_contribution.len()),
            });
        }
        let k = self.decay_factor(dt);
        for e in &mut self.traces {
            *e *= k;
        }
        for (e, s) in self.traces[pre * self.post_size..(pre + 1) * self.post_size]
            .iter_mut()
            .zip(row_contribution)
        {
            *e += s;
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        self.traces.fill(0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.traces.iter().all(|&e| e == 0.0)
    }
}

/// `w <- clip(w + reward * e)`.
pub fn apply_reward(weights: &mut SynapticMatrix, trace: &EligibilityTrace, reward: f64) -> Result<()> {
    if trace.shape() != weights.shape() {
        return Err(Error::ShapeMismatch {
            expected: weights.shape(),
            actual: trace.shape(),
        });
    }
    if !reward.is_finite() {
        return Err(Error::param("reward", format!("non-finite reward {reward}")));
    }
    if reward == 0.0 {
        return Ok(());
    }
    let (lo, hi) = weights.weight_bounds;
    for (w, e) in weights.weights.iter_mut().zip(&trace.traces) {
        *w = (*w + reward * e).clamp(lo, hi);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_euler_step_decays_by_tenth() {
        let mut tr = EligibilityTrace::new(1, 1, 10.0);
        tr.update(&[1.0], 1.0).unwrap();
        tr.update(&[0.0], 1.0).unwrap();
        assert!((tr.get(0, 0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_trace_is_a_fixed_point() {
        let mut tr = EligibilityTrace::new(2, 2, 10.0);
        for _ in 0..10 {
            tr.update(&[0.0; 4], 1.0).unwrap();
        }
        assert!(tr.is_zero());
    }

    #[test]
    fn impulse_then_ten_steps_of_decay() {
        let mut tr = EligibilityTrace::new(1, 1, 10.0);
        tr.update(&[0.18394], 1.0).unwrap();
        for _ in 0..10 {
            tr.update(&[0.0], 1.0).unwrap();
        }
        // 0.18394 * 0.9^10
        assert!((tr.get(0, 0) - 0.064_135_912_271_994).abs() < 1e-9, "{}", tr.get(0, 0));
    }

    #[test]
    fn exponential_decay_option() {
        let mut tr = EligibilityTrace::new(1, 1, 10.0);
        tr.decay = TraceDecay::Exponential;
        tr.update(&[1.0], 1.0).unwrap();
        tr.update(&[0.0], 1.0).unwrap();
        assert!((tr.get(0, 0) - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn update_row_only_deposits_on_that_row() {
        let mut tr = EligibilityTrace::new(2, 2, 10.0);
        tr.update(&[1.0, 1.0, 1.0, 1.0], 1.0).unwrap();
        tr.update_row(1, &[0.5, 0.0], 1.0).unwrap();
        assert_eq!(tr.values(), &[0.9, 0.9, 1.4, 0.9]);
    }

    #[test]
    fn reward_scales_trace() {
        let mut w = SynapticMatrix::new(1, 3, SynapseSign::Excitatory, 1.0).unwrap();
        let mut tr = EligibilityTrace::for_matrix(&w, 10.0);
        tr.update(&[0.05, 0.0, 0.05], 1.0).unwrap();

        apply_reward(&mut w, &tr, 0.0).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 1.0]);

        apply_reward(&mut w, &tr, 10.0).unwrap();
        assert!((w.get(0, 0) - 1.5).abs() < 1e-12);
        assert_eq!(w.get(0, 1), 1.0);

        apply_reward(&mut w, &tr, -1.0).unwrap();
        assert!((w.get(0, 2) - 1.45).abs() < 1e-12);
    }

    #[test]
    fn reward_shape_mismatch_is_rejected() {
        let mut w = SynapticMatrix::new(2, 3, SynapseSign::Excitatory, 1.0).unwrap();
        let tr = EligibilityTrace::new(3, 2, 10.0);
        assert!(matches!(
            apply_reward(&mut w, &tr, 1.0),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn inhibitory_matrix_contributes_negative_current() {
        let m = SynapticMatrix::new(2, 2, SynapseSign::Inhibitory, -2.0).unwrap();
        let mut cur = [0.0; 2];
        m.propagate(&[0, 1], 0.5, &mut cur);
        assert_eq!(cur, [-2.0, -2.0]);
        assert!(SynapticMatrix::with_bounds(1, 1, SynapseSign::Inhibitory, (-1.0, 1.0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn decay_law_is_geometric(e0 in -10.0f64..10.0, n in 0usize..200) {
            let mut tr = EligibilityTrace::new(1, 1, 10.0);
            tr.update(&[e0], 1.0).unwrap();
            for _ in 0..n {
                tr.update(&[0.0], 1.0).unwrap();
            }
            let expected = e0 * 0.9f64.powi(n as i32);
            prop_assert!((tr.get(0, 0) - expected).abs() <= 1e-12);
        }

        #[test]
        fn reward_keeps_weights_in_bounds(
            init in 0.0f64..5.0,
            traces in proptest::collection::vec(-3.0f64..3.0, 6),
            reward in -40.0f64..40.0,
        ) {
            let mut w = SynapticMatrix::new(2, 3, SynapseSign::Excitatory, init).unwrap();
            let mut tr = EligibilityTrace::for_matrix(&w, 10.0);
            tr.update(&traces, 1.0).unwrap();
            apply_reward(&mut w, &tr, reward).unwrap();
            prop_assert!(w.min_weight() >= 0.0);
            prop_assert!(w.max_weight() <= 5.0);
        }
    }
}
