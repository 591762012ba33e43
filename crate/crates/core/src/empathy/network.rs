use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{CueColor, Emotion, OutwardCue};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::snn::plasticity::ltp_between;
use crate::snn::{
    current_for_rate, LifParameters, NeuronPopulation, PlasticityParams, SpikeLog, SpikeTrain, SynapseSign,
    SynapticMatrix,
};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Population ids used in spike logs.
pub const EMOTION_POP_ID: u16 = 1;
pub const MIRROR_POP_ID: u16 = 2;
pub const PERCEPTION_POP_ID: u16 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Emotion,
    Mirror,
    Perception,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Emotion, Region::Mirror, Region::Perception];

    pub fn population_id(self) -> u16 {
        match self {
            Region::Emotion => EMOTION_POP_ID,
            Region::Mirror => MIRROR_POP_ID,
            Region::Perception => PERCEPTION_POP_ID,
        }
    }
}

/// Sub-group order inside every region.
pub fn category_index(emotion: Emotion) -> usize {
    match emotion {
        Emotion::Negative => 0,
        Emotion::Normal => 1,
    }
}

pub fn cue_category(cue: OutwardCue) -> Emotion {
    match cue.color {
        CueColor::Red => Emotion::Negative,
        CueColor::Green => Emotion::Normal,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmpathyParams {
    pub neurons_per_category: usize,
    pub lif: LifParameters,
    pub plasticity: PlasticityParams,
    pub initial_weight: f64,
    pub max_weight: f64,
    /// Current injected per unit weight per presynaptic spike.
    pub synaptic_gain: f64,
    /// Decay of the synaptic current (ms).
    pub synaptic_time_constant: f64,
    /// Target rate of a driven sub-group (Hz).
    pub drive_rate_hz: f64,
    /// Per-neuron drive spread, as a fraction of the drive.
    pub drive_jitter: f64,
    pub trial_ms: f64,
    pub mirror_onset_ms: f64,
    pub perception_onset_ms: f64,
    pub inference_ms: f64,
    /// Cue presentation before the inference window opens, so rates are read
    /// from the settled response (ms).
    pub settle_ms: f64,
    pub training_trials: usize,
    pub inhibitory_sources: usize,
    /// Current removed from an emotion neuron per active inhibitory synapse.
    pub inhibitory_gain: f64,
    /// O_emp = -1 once the negative-emotion rate reaches this fraction of baseline.
    pub detection_fraction: f64,
    pub seed: u64,
}

impl Default for EmpathyParams {
    fn default() -> Self {
        Self {
            neurons_per_category: 20,
            lif: LifParameters::default(),
            plasticity: PlasticityParams::default(),
            initial_weight: 0.05,
            max_weight: 5.0,
            synaptic_gain: 0.04,
            synaptic_time_constant: 5.0,
            drive_rate_hz: 50.0,
            drive_jitter: 0.1,
            trial_ms: 300.0,
            mirror_onset_ms: 100.0,
            perception_onset_ms: 200.0,
            inference_ms: 200.0,
            settle_ms: 100.0,
            training_trials: 50,
            inhibitory_sources: 20,
            inhibitory_gain: 0.08,
            detection_fraction: 0.2,
            seed: 0,
        }
    }
}

impl EmpathyParams {
    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        self.plasticity.validate()?;
        if self.neurons_per_category == 0 {
            return Err(Error::param("neurons_per_category", "must be >= 1"));
        }
        if self.inhibitory_sources == 0 {
            return Err(Error::param("inhibitory_sources", "must be >= 1"));
        }
        if !(self.initial_weight >= 0.0 && self.initial_weight <= self.max_weight) {
            return Err(Error::param("initial_weight", "must lie in [0, max_weight]"));
        }
        for (name, v) in [
            ("synaptic_gain", self.synaptic_gain),
            ("synaptic_time_constant", self.synaptic_time_constant),
            ("drive_rate_hz", self.drive_rate_hz),
            ("trial_ms", self.trial_ms),
            ("inference_ms", self.inference_ms),
            ("inhibitory_gain", self.inhibitory_gain),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.settle_ms >= 0.0 && self.settle_ms.is_finite()) {
            return Err(Error::param("settle_ms", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.drive_jitter) {
            return Err(Error::param("drive_jitter", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.detection_fraction) {
            return Err(Error::param("detection_fraction", "must lie in [0, 1]"));
        }
        if !(0.0 <= self.mirror_onset_ms
            && self.mirror_onset_ms <= self.perception_onset_ms
            && self.perception_onset_ms < self.trial_ms)
        {
            return Err(Error::param(
                "perception_onset_ms",
                "need 0 <= mirror onset <= perception onset < trial",
            ));
        }
        Ok(())
    }

    fn region_size(&self) -> usize {
        2 * self.neurons_per_category
    }
}

/// Spike trains of the three regions over one simulated window.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTrains {
    pub emotion: Vec<SpikeTrain>,
    pub mirror: Vec<SpikeTrain>,
    pub perception: Vec<SpikeTrain>,
    pub duration_ms: f64,
}

impl RegionTrains {
    pub fn region(&self, region: Region) -> &[SpikeTrain] {
        match region {
            Region::Emotion => &self.emotion,
            Region::Mirror => &self.mirror,
            Region::Perception => &self.perception,
        }
    }

    /// Mean rate (Hz) of one emotion-category sub-group of a region.
    pub fn group_rate_hz(&self, region: Region, category: Emotion, per_category: usize) -> f64 {
        let start = category_index(category) * per_category;
        let trains = &self.region(region)[start..start + per_category];
        // Spikes are stamped at the end of their step, so the window is (0, duration].
        let spikes: usize = trains
            .iter()
            .map(|t| {
                t.spike_times
                    .iter()
                    .filter(|&&s| s > 0.0 && s <= self.duration_ms)
                    .count()
            })
            .sum();
        spikes as f64 / per_category as f64 / (self.duration_ms / 1000.0)
    }
}

/// Which sub-group of each region receives external drive, and from when (ms).
#[derive(Debug, Clone, Copy, Default)]
struct DriveSchedule {
    emotion: Option<(Emotion, f64)>,
    mirror: Option<(Emotion, f64)>,
    perception: Option<(Emotion, f64)>,
}

/// Diagnostic attached to an inference that could not use a learned pathway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceDiagnostic {
    NoMirrorResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRates {
    /// Indexed by category: `[negative, normal]`, Hz.
    pub emotion: [f64; 2],
    pub mirror: [f64; 2],
    pub perception: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    /// `-1` when the observer shares the peer's distress, else `0`.
    pub o_emp: i8,
    pub rates: RegionRates,
    pub diagnostic: Option<InferenceDiagnostic>,
    pub trains: RegionTrains,
}

/// Emotion, mirror and perception regions with learned bidirectional links and
/// tonic inhibitory input onto the emotion region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpathyNetwork {
    pub params: EmpathyParams,
    pub w_emotion_mirror: SynapticMatrix,
    pub w_mirror_emotion: SynapticMatrix,
    pub w_mirror_perception: SynapticMatrix,
    pub w_perception_mirror: SynapticMatrix,
    /// Inhibitory sources x emotion neurons; active synapses hold -1.
    pub w_inhib_emotion: SynapticMatrix,
    pub inhibitory_proportion: f64,
    /// Per-neuron drive multipliers, emotion then mirror then perception.
    drive_gains: Vec<f64>,
    /// Synapse order used to pick which inhibitory synapses are active.
    inhibition_order: Vec<usize>,
    /// Uninhibited negative-emotion rate (Hz) used for detection.
    pub baseline_hz: Option<f64>,
    pub trials_trained: usize,
}

impl EmpathyNetwork {
    pub fn new(params: EmpathyParams) -> Result<Self> {
        params.validate()?;
        let n = params.region_size();
        let exc =
            |init: f64| SynapticMatrix::with_bounds(n, n, SynapseSign::Excitatory, (0.0, params.max_weight), init);
        let mut rng = stream(params.seed, "empathy", 0);
        let j = params.drive_jitter;
        let drive_gains = (0..3 * n).map(|_| 1.0 + rng.random_range(-j..=j)).collect();
        let mut inhibition_order: Vec<usize> = (0..params.inhibitory_sources * n).collect();
        inhibition_order.shuffle(&mut rng);
        Ok(Self {
            params,
            w_emotion_mirror: exc(params.initial_weight)?,
            w_mirror_emotion: exc(params.initial_weight)?,
            w_mirror_perception: exc(params.initial_weight)?,
            w_perception_mirror: exc(params.initial_weight)?,
            w_inhib_emotion: SynapticMatrix::new(params.inhibitory_sources, n, SynapseSign::Inhibitory, 0.0)?,
            inhibitory_proportion: 0.0,
            drive_gains,
            inhibition_order,
            baseline_hz: None,
            trials_trained: 0,
        })
    }

    pub fn region_size(&self) -> usize {
        self.params.region_size()
    }

    /// Activates the first `round(p * n_synapses)` inhibitory synapses of a fixed
    /// seeded order, so active sets are nested as `p` grows.
    pub fn set_inhibitory_proportion(&mut self, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidProportion(p));
        }
        let n = self.region_size();
        let active = (p * self.inhibition_order.len() as f64).round() as usize;
        let mut w = SynapticMatrix::new(self.params.inhibitory_sources, n, SynapseSign::Inhibitory, 0.0)?;
        for &k in &self.inhibition_order[..active] {
            w.set(k / n, k % n, -1.0);
        }
        self.w_inhib_emotion = w;
        self.inhibitory_proportion = p;
        Ok(())
    }

    /// Constant inhibitory current on each emotion neuron (non-positive).
    pub fn inhibition_current(&self) -> Vec<f64> {
        let n = self.region_size();
        let mut current = vec![0.0; n];
        for src in 0..self.params.inhibitory_sources {
            for (c, w) in current.iter_mut().zip(self.w_inhib_emotion.row(src)) {
                *c += self.params.inhibitory_gain * w;
            }
        }
        current
    }

    /// True while every inter-region weight still sits at its initial value.
    pub fn is_untrained(&self) -> bool {
        let init = self.params.initial_weight;
        [
            &self.w_emotion_mirror,
            &self.w_mirror_emotion,
            &self.w_mirror_perception,
            &self.w_perception_mirror,
        ]
        .iter()
        .all(|m| m.weights().iter().all(|&w| w == init))
    }

    fn simulate(
        &self,
        duration_ms: f64,
        drive: DriveSchedule,
        inhibit: bool,
        mut log: Option<&mut SpikeLog>,
    ) -> Result<RegionTrains> {
        let p = &self.params;
        let n = self.region_size();
        let per = p.neurons_per_category;
        let mut pops = [
            NeuronPopulation::new(EMOTION_POP_ID, n, p.lif)?,
            NeuronPopulation::new(MIRROR_POP_ID, n, p.lif)?,
            NeuronPopulation::new(PERCEPTION_POP_ID, n, p.lif)?,
        ];
        let drive_current = current_for_rate(&p.lif, p.drive_rate_hz);
        let schedules = [drive.emotion, drive.mirror, drive.perception];
        let inhibition = if inhibit {
            self.inhibition_current()
        } else {
            vec![0.0; n]
        };
        let syn_decay = (-p.lif.dt / p.synaptic_time_constant).exp();
        let mut syn = vec![vec![0.0; n]; 3];
        let mut spikes: [Vec<usize>; 3] = Default::default();
        let mut times: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n]; 3];
        let mut input = vec![0.0; n];
        let steps = (duration_ms / p.lif.dt).round() as usize;
        for step in 0..steps {
            let t = step as f64 * p.lif.dt;
            for s in &mut syn {
                s.iter_mut().for_each(|c| *c *= syn_decay);
            }
            // Spikes from the previous step arrive now.
            self.w_mirror_emotion
                .propagate(&spikes[1], p.synaptic_gain, &mut syn[0]);
            self.w_emotion_mirror
                .propagate(&spikes[0], p.synaptic_gain, &mut syn[1]);
            self.w_perception_mirror
                .propagate(&spikes[2], p.synaptic_gain, &mut syn[1]);
            self.w_mirror_perception
                .propagate(&spikes[1], p.synaptic_gain, &mut syn[2]);
            for r in 0..3 {
                input.copy_from_slice(&syn[r]);
                if let Some((cat, onset)) = schedules[r] {
                    if t >= onset {
                        let start = category_index(cat) * per;
                        let gains = &self.drive_gains[r * n + start..r * n + start + per];
                        for (x, g) in input[start..start + per].iter_mut().zip(gains) {
                            *x += drive_current * g;
                        }
                    }
                }
                if r == 0 {
                    for (c, inh) in input.iter_mut().zip(&inhibition) {
                        *c += inh;
                    }
                }
                spikes[r].clear();
                pops[r].step_into(&input, &mut spikes[r])?;
                let now = pops[r].time();
                for &k in &spikes[r] {
                    times[r][k].push(now);
                }
                if let Some(log) = log.as_deref_mut() {
                    log.record(now, pops[r].id(), &spikes[r]);
                }
            }
        }
        let to_trains = |v: Vec<Vec<f64>>| -> Vec<SpikeTrain> {
            v.into_iter().enumerate().map(|(i, t)| SpikeTrain::new(i, t)).collect()
        };
        let mut it = times.into_iter();
        Ok(RegionTrains {
            emotion: to_trains(it.next().unwrap_or_default()),
            mirror: to_trains(it.next().unwrap_or_default()),
            perception: to_trains(it.next().unwrap_or_default()),
            duration_ms,
        })
    }

    /// One staged self-experience trial: `category` drives emotion from 0 ms, mirror
    /// from the mirror onset and perception from the perception onset. Returns the
    /// trial's spike trains; weights are not changed.
    pub fn run_self_experience_trial(&self, category: Emotion, log: Option<&mut SpikeLog>) -> Result<RegionTrains> {
        let p = &self.params;
        let drive = DriveSchedule {
            emotion: Some((category, 0.0)),
            mirror: Some((category, p.mirror_onset_ms)),
            perception: Some((category, p.perception_onset_ms)),
        };
        self.simulate(p.trial_ms, drive, true, log)
    }

    /// Applies the LTP rule to all four inter-region matrices from one trial's trains.
    pub fn apply_trial_ltp(&mut self, trains: &RegionTrains) {
        let plast = self.params.plasticity;
        let pairs: [(&[SpikeTrain], &[SpikeTrain], &mut SynapticMatrix); 4] = [
            (&trains.emotion, &trains.mirror, &mut self.w_emotion_mirror),
            (&trains.mirror, &trains.emotion, &mut self.w_mirror_emotion),
            (&trains.mirror, &trains.perception, &mut self.w_mirror_perception),
            (&trains.perception, &trains.mirror, &mut self.w_perception_mirror),
        ];
        for (pre, post, w) in pairs {
            for (i, pre_train) in pre.iter().enumerate() {
                if pre_train.is_empty() {
                    continue;
                }
                for (j, post_train) in post.iter().enumerate() {
                    let dw = ltp_between(&pre_train.spike_times, &post_train.spike_times, &plast);
                    if dw != 0.0 {
                        w.set(i, j, w.get(i, j) + dw);
                    }
                }
            }
        }
    }

    /// Self-experience phase: alternates negative and normal trials, `trials` in total.
    pub fn self_experience_train(&mut self, trials: usize) -> Result<()> {
        for k in 0..trials {
            let category = if k % 2 == 0 { Emotion::Negative } else { Emotion::Normal };
            let trains = self.run_self_experience_trial(category, None)?;
            self.apply_trial_ltp(&trains);
            self.trials_trained += 1;
        }
        Ok(())
    }

    /// Drives the perception sub-group matching `cue` and returns the trains of the
    /// inference window, which opens after the settle period (times relative to it).
    pub fn present_cue(&self, cue: OutwardCue, inhibit: bool, log: Option<&mut SpikeLog>) -> Result<RegionTrains> {
        let p = &self.params;
        let drive = DriveSchedule {
            perception: Some((cue_category(cue), 0.0)),
            ..Default::default()
        };
        let full = self.simulate(p.settle_ms + p.inference_ms, drive, inhibit, log)?;
        let (t0, t1) = (p.settle_ms, p.settle_ms + p.inference_ms);
        let crop = |trains: Vec<SpikeTrain>| -> Vec<SpikeTrain> {
            trains
                .into_iter()
                .map(|tr| {
                    let w = tr.window(t0 + 0.5 * p.lif.dt, t1 + 0.5 * p.lif.dt);
                    SpikeTrain::new(w.neuron_index, w.spike_times.iter().map(|t| t - t0).collect())
                })
                .collect()
        };
        Ok(RegionTrains {
            emotion: crop(full.emotion),
            mirror: crop(full.mirror),
            perception: crop(full.perception),
            duration_ms: p.inference_ms,
        })
    }

    fn rates(&self, trains: &RegionTrains) -> RegionRates {
        let per = self.params.neurons_per_category;
        let pair = |r| {
            [
                trains.group_rate_hz(r, Emotion::Negative, per),
                trains.group_rate_hz(r, Emotion::Normal, per),
            ]
        };
        RegionRates {
            emotion: pair(Region::Emotion),
            mirror: pair(Region::Mirror),
            perception: pair(Region::Perception),
        }
    }

    /// Rate of the negative-emotion sub-group under a red cue with inhibition removed.
    pub fn uninhibited_negative_rate(&self) -> Result<f64> {
        let trains = self.present_cue(OutwardCue::red(crate::env::AgentId::B), false, None)?;
        Ok(self.rates(&trains).emotion[0])
    }

    /// Perception -> mirror -> emotion inference for one cue.
    pub fn infer_emotion(&self, cue: OutwardCue) -> Result<Inference> {
        let trains = self.present_cue(cue, true, None)?;
        let rates = self.rates(&trains);
        if self.is_untrained() {
            return Ok(Inference {
                o_emp: 0,
                rates,
                diagnostic: Some(InferenceDiagnostic::NoMirrorResponse),
                trains,
            });
        }
        let baseline = match self.baseline_hz {
            Some(b) => b,
            None => self.uninhibited_negative_rate()?,
        };
        let negative = rates.emotion[0];
        let o_emp = if baseline > 0.0 && negative > 0.0 && negative >= self.params.detection_fraction * baseline {
            -1
        } else {
            0
        };
        Ok(Inference {
            o_emp,
            rates,
            diagnostic: None,
            trains,
        })
    }

    /// Sum of learned weights inside the negative-category blocks of the four links.
    pub fn negative_pathway_weight(&self) -> f64 {
        let per = self.params.neurons_per_category;
        [
            &self.w_emotion_mirror,
            &self.w_mirror_emotion,
            &self.w_mirror_perception,
            &self.w_perception_mirror,
        ]
        .iter()
        .map(|m| m.block_sum(0..per, 0..per))
        .sum()
    }

    pub fn to_snapshot_json(&self) -> Result<String> {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            network: self.clone(),
        };
        serde_json::to_string_pretty(&snap).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_snapshot_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if header.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion {
                found: header.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let snap: Snapshot = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        snap.network.params.validate()?;
        Ok(snap.network)
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    network: EmpathyNetwork,
}
