//! Pair-based plasticity kernels.
//!
//! Timing is expressed as `lag = t_pre - t_post`, so a presynaptic spike that
//! precedes the postsynaptic one has a negative lag.
//!
//! * LTP-only rule: `A+ * exp(lag / tau+)` for `lag < 0`, nothing otherwise.
//! * Bidirectional rule: the same potentiation for `lag < 0`, and depression
//!   `-A- * exp(-lag / tau-)` for `lag > 0`. Coincident spikes contribute zero.

use serde::{Deserialize, Serialize};

use super::spikes::SpikeTrain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlasticityParams {
    pub a_plus: f64,
    pub a_minus: f64,
    /// ms
    pub tau_plus: f64,
    /// ms
    pub tau_minus: f64,
    pub pairing: Pairing,
}

impl Default for PlasticityParams {
    fn default() -> Self {
        Self {
            a_plus: 0.5,
            a_minus: 0.45,
            tau_plus: 20.0,
            tau_minus: 20.0,
            pairing: Pairing::NearestNeighbor,
        }
    }
}

impl PlasticityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_plus", self.a_plus),
            ("a_minus", self.a_minus),
            ("tau_plus", self.tau_plus),
            ("tau_minus", self.tau_minus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Potentiation magnitude for a causal pair (`lag < 0`), zero otherwise.
    pub fn ltp_kernel(&self, lag: f64) -> f64 {
        if lag < 0.0 {
            self.a_plus * (lag / self.tau_plus).exp()
        } else {
            0.0
        }
    }

    /// Signed bidirectional kernel.
    pub fn stdp_kernel(&self, lag: f64) -> f64 {
        if lag < 0.0 {
            self.a_plus * (lag / self.tau_plus).exp()
        } else if lag > 0.0 {
            -self.a_minus * (-lag / self.tau_minus).exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Each spike pairs only with the most recent spike of the other neuron.
    #[default]
    NearestNeighbor,
    AllToAll,
}

/// Most recent element of a sorted slice strictly before `t`.
fn last_before(times: &[f64], t: f64) -> Option<f64> {
    let idx = times.partition_point(|&s| s < t);
    idx.checked_sub(1).map(|i| times[i])
}

/// Summed LTP over causal pre -> post pairs. Never negative.
pub fn ltp_update(pre: &SpikeTrain, post: &SpikeTrain, params: &PlasticityParams) -> f64 {
    ltp_between(&pre.spike_times, &post.spike_times, params)
}

pub(crate) fn ltp_between(pre: &[f64], post: &[f64], params: &PlasticityParams) -> f64 {
    if pre.is_empty() || post.is_empty() {
        return 0.0;
    }
    // An empty float sum is -0.0; adding 0.0 normalises it.
    let total: f64 = match params.pairing {
        Pairing::NearestNeighbor => post
            .iter()
            .filter_map(|&tp| last_before(pre, tp).map(|tq| params.ltp_kernel(tq - tp)))
            .sum(),
        Pairing::AllToAll => post
            .iter()
            .map(|&tp| {
                pre.iter()
                    .take_while(|&&tq| tq < tp)
                    .map(|&tq| params.ltp_kernel(tq - tp))
                    .sum::<f64>()
            })
            .sum(),
    };
    total + 0.0
}

/// Signed bidirectional STDP summed over the pairs selected by the pairing scheme.
pub fn stdp_bidirectional(pre: &SpikeTrain, post: &SpikeTrain, params: &PlasticityParams) -> f64 {
    stdp_between(&pre.spike_times, &post.spike_times, params)
}

pub(crate) fn stdp_between(pre: &[f64], post: &[f64], params: &PlasticityParams) -> f64 {
    if pre.is_empty() || post.is_empty() {
        return 0.0;
    }
    // An empty float sum is -0.0; adding 0.0 normalises it.
    let total: f64 = match params.pairing {
        Pairing::NearestNeighbor => {
            let potentiation: f64 = post
                .iter()
                .filter_map(|&tp| last_before(pre, tp).map(|tq| params.stdp_kernel(tq - tp)))
                .sum();
            let depression: f64 = pre
                .iter()
                .filter_map(|&tq| last_before(post, tq).map(|tp| params.stdp_kernel(tq - tp)))
                .sum();
            potentiation + depression
        }
        Pairing::AllToAll => pre
            .iter()
            .flat_map(|&tq| post.iter().map(move |&tp| tq - tp))
            .map(|lag| params.stdp_kernel(lag))
            .sum(),
    };
    total + 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn train(times: &[f64]) -> SpikeTrain {
        SpikeTrain::new(0, times.to_vec())
    }

    #[test]
    fn ltp_of_empty_trains_is_zero() {
        let p = PlasticityParams::default();
        assert_eq!(ltp_update(&train(&[]), &train(&[]), &p), 0.0);
        assert_eq!(ltp_update(&train(&[1.0]), &train(&[]), &p), 0.0);
    }

    #[test]
    fn ltp_single_pairs() {
        let p = PlasticityParams::default();
        let far = ltp_update(&train(&[0.0]), &train(&[20.0]), &p);
        let near = ltp_update(&train(&[19.0]), &train(&[20.0]), &p);
        assert!((far - 0.183_939_720_585_721_2).abs() < 1e-12);
        assert!((near - 0.475_614_712_250_357).abs() < 1e-12);
        assert!(near > far);
        // post before pre does not potentiate
        assert_eq!(ltp_update(&train(&[30.0]), &train(&[20.0]), &p), 0.0);
    }

    #[test]
    fn stdp_branches() {
        let p = PlasticityParams::default();
        assert!((p.stdp_kernel(-20.0) - 0.183_939_720_585_721_2).abs() < 1e-12);
        assert!((p.stdp_kernel(20.0) + 0.165_545_748_527_149_1).abs() < 1e-12);
        assert_eq!(p.stdp_kernel(0.0), 0.0);
        assert_eq!(stdp_bidirectional(&train(&[]), &train(&[]), &p), 0.0);
        let causal = stdp_bidirectional(&train(&[0.0]), &train(&[20.0]), &p);
        let acausal = stdp_bidirectional(&train(&[20.0]), &train(&[0.0]), &p);
        assert!((causal - 0.183_939_720_585_721_2).abs() < 1e-12);
        assert!((acausal + 0.165_545_748_527_149_1).abs() < 1e-12);
    }

    #[test]
    fn nearest_neighbour_uses_latest_pre_only() {
        let p = PlasticityParams::default();
        let nn = ltp_update(&train(&[0.0, 10.0]), &train(&[20.0]), &p);
        assert!((nn - p.ltp_kernel(-10.0)).abs() < 1e-15);
        let all = PlasticityParams {
            pairing: Pairing::AllToAll,
            ..p
        };
        let a2a = ltp_update(&train(&[0.0, 10.0]), &train(&[20.0]), &all);
        assert!((a2a - p.ltp_kernel(-10.0) - p.ltp_kernel(-20.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = PlasticityParams {
            tau_plus: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(PlasticityParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn ltp_is_non_negative(
            mut pre in proptest::collection::vec(0.0f64..500.0, 0..20),
            mut post in proptest::collection::vec(0.0f64..500.0, 0..20),
            all in any::<bool>(),
        ) {
            pre.sort_by(f64::total_cmp);
            pre.dedup();
            post.sort_by(f64::total_cmp);
            post.dedup();
            let params = PlasticityParams {
                pairing: if all { Pairing::AllToAll } else { Pairing::NearestNeighbor },
                ..Default::default()
            };
            prop_assert!(ltp_between(&pre, &post, &params) >= 0.0);
        }

        #[test]
        fn ltp_monotone_in_lag(a in -200.0f64..-0.001, b in -200.0f64..-0.001) {
            let p = PlasticityParams::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(p.ltp_kernel(lo) <= p.ltp_kernel(hi));
        }
    }
}
