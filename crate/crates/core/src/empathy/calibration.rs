use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::network::{EmpathyNetwork, EmpathyParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpathyLevel {
    pub inhibitory_proportion: f64,
    /// Percentage of the uninhibited negative-emotion rate.
    pub f_e: f64,
}

/// Trains the uninhibited reference network once and measures `F_e` for any
/// inhibitory proportion against it.
#[derive(Debug, Clone)]
pub struct Calibrator {
    params: EmpathyParams,
    baseline_hz: f64,
}

impl Calibrator {
    pub fn new(params: EmpathyParams) -> Result<Self> {
        let mut reference = EmpathyNetwork::new(params)?;
        reference.self_experience_train(params.training_trials)?;
        let baseline_hz = reference.uninhibited_negative_rate()?;
        if baseline_hz <= 0.0 {
            return Err(Error::param(
                "synaptic_gain",
                "trained network shows no negative-emotion response to a red cue",
            ));
        }
        Ok(Self { params, baseline_hz })
    }

    pub fn baseline_hz(&self) -> f64 {
        self.baseline_hz
    }

    pub fn params(&self) -> &EmpathyParams {
        &self.params
    }

    /// Builds and trains a network under inhibitory proportion `p`.
    pub fn network(&self, p: f64) -> Result<EmpathyNetwork> {
        let mut net = EmpathyNetwork::new(self.params)?;
        net.set_inhibitory_proportion(p)?;
        net.self_experience_train(self.params.training_trials)?;
        net.baseline_hz = Some(self.baseline_hz);
        Ok(net)
    }

    /// `F_e` of an already trained network.
    pub fn measure(&self, net: &EmpathyNetwork) -> Result<EmpathyLevel> {
        let inference = net.infer_emotion(crate::env::OutwardCue::red(crate::env::AgentId::B))?;
        Ok(EmpathyLevel {
            inhibitory_proportion: net.inhibitory_proportion,
            f_e: 100.0 * inference.rates.emotion[0] / self.baseline_hz,
        })
    }

    pub fn level(&self, p: f64) -> Result<(EmpathyNetwork, EmpathyLevel)> {
        let net = self.network(p)?;
        let level = self.measure(&net)?;
        Ok((net, level))
    }

    /// Bisection for the proportion whose `F_e` is closest to `target_fe`.
    ///
    /// `F_e` is a step function of the proportion (the active synapse count is an
    /// integer), so the search stops once the bracket is narrower than one synapse.
    pub fn find_proportion(&self, target_fe: f64) -> Result<(EmpathyNetwork, EmpathyLevel)> {
        if !(0.0..=100.0).contains(&target_fe) {
            return Err(Error::param("target_fe", format!("{target_fe} outside [0, 100]")));
        }
        let n_syn = (self.params.inhibitory_sources * 2 * self.params.neurons_per_category) as f64;
        let mut lo = self.level(0.0)?;
        let mut hi = self.level(1.0)?;
        if lo.1.f_e <= target_fe {
            return Ok(lo);
        }
        if hi.1.f_e >= target_fe {
            return Ok(hi);
        }
        while (hi.1.inhibitory_proportion - lo.1.inhibitory_proportion) * n_syn > 1.0 {
            let mid_p = 0.5 * (lo.1.inhibitory_proportion + hi.1.inhibitory_proportion);
            let mid = self.level(mid_p)?;
            if mid.1.f_e >= target_fe {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if (lo.1.f_e - target_fe).abs() <= (hi.1.f_e - target_fe).abs() {
            lo
        } else {
            hi
        })
    }
}

/// Trains a network under proportion `p` and reports its empathy level.
pub fn calibrate_empathy_level(params: EmpathyParams, p: f64) -> Result<(EmpathyNetwork, EmpathyLevel)> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProportion(p));
    }
    Calibrator::new(params)?.level(p)
}

/// `proportion,f_e` table.
pub fn calibration_csv(levels: &[EmpathyLevel]) -> String {
    let mut out = String::from("proportion,f_e\n");
    for l in levels {
        let _ = writeln!(out, "{},{}", l.inhibitory_proportion, l.f_e);
    }
    out
}
