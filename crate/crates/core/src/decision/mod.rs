//! Moral decision network: one place-coded state neuron per `(x, y, O_emp)`,
//! fully connected to four action groups of 50 neurons, trained with
//! reward-modulated STDP.
//!
//! A decision runs in two phases. During the vote window the active state
//! neuron drives all four groups through the learned weights and the group
//! with the most spikes wins. During the short execution window that follows,
//! the executed group fires one tick after each state spike (an efference
//! copy); the bidirectional STDP of that window is deposited into the
//! eligibility trace for synapses onto the executed group only.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Cell};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::snn::plasticity::stdp_between;
use crate::snn::{
    apply_reward, current_for_rate, EligibilityTrace, LifParameters, NeuronPopulation, PlasticityParams, SynapseSign,
    SynapticMatrix, TraceDecay,
};

pub const STATE_POP_ID: u16 = 10;
/// Action groups use ids `ACTION_POP_ID_BASE + action index`.
pub const ACTION_POP_ID_BASE: u16 = 11;

/// Input to the decision network: A's cell and the empathy output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateObservation {
    pub x: usize,
    pub y: usize,
    /// `-1` while A shares B's distress, else `0`.
    pub o_emp: i8,
}

impl StateObservation {
    pub fn new(cell: Cell, o_emp: i8) -> Self {
        Self {
            x: cell.0,
            y: cell.1,
            o_emp,
        }
    }

    pub fn cell(&self) -> Cell {
        (self.x, self.y)
    }
}

/// Index of the state neuron for `obs`: `y * W + x`, offset by `W * H` when `o_emp = -1`.
pub fn encode_state(obs: StateObservation, width: usize, height: usize) -> Result<usize> {
    if obs.x >= width || obs.y >= height {
        return Err(Error::OutOfBounds {
            x: obs.x as i64,
            y: obs.y as i64,
            width,
            height,
        });
    }
    let flag = match obs.o_emp {
        0 => 0,
        -1 => width * height,
        other => return Err(Error::param("o_emp", format!("must be 0 or -1, got {other}"))),
    };
    Ok(obs.y * width + obs.x + flag)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoralReward {
    pub r_self_task: f64,
    pub da_in_emp: f64,
    pub r_moral: f64,
}

impl MoralReward {
    pub fn new(r_self_task: f64, da_in_emp: f64) -> Self {
        Self {
            r_self_task,
            da_in_emp,
            r_moral: r_self_task + da_in_emp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionParams {
    pub group_size: usize,
    pub lif: LifParameters,
    pub plasticity: PlasticityParams,
    pub vote_ms: f64,
    pub execution_ms: f64,
    pub state_rate_hz: f64,
    pub initial_weight: f64,
    pub initial_jitter: f64,
    pub max_weight: f64,
    /// Weights at which the first and the last neuron of a group start
    /// following the state neuron spike for spike.
    pub recruitment_range: (f64, f64),
    /// ms
    pub tau_e: f64,
    pub trace_decay: TraceDecay,
    /// Trace time advanced per environment step (ms).
    pub trace_step_ms: f64,
    /// Scales the moral reward before it meets the trace.
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_anneal_episodes: usize,
    pub seed: u64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        Self {
            group_size: 50,
            lif: LifParameters::default(),
            plasticity: PlasticityParams::default(),
            vote_ms: 200.0,
            execution_ms: 40.0,
            state_rate_hz: 50.0,
            initial_weight: 0.5,
            initial_jitter: 0.05,
            max_weight: 5.0,
            recruitment_range: (0.9, 5.0),
            tau_e: 10.0,
            trace_decay: TraceDecay::Euler,
            trace_step_ms: 1.0,
            learning_rate: 0.02,
            epsilon_start: 0.3,
            epsilon_end: 0.01,
            epsilon_anneal_episodes: 1000,
            seed: 0,
        }
    }
}

impl DecisionParams {
    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        self.plasticity.validate()?;
        if self.group_size == 0 {
            return Err(Error::param("group_size", "must be >= 1"));
        }
        for (name, v) in [
            ("vote_ms", self.vote_ms),
            ("execution_ms", self.execution_ms),
            ("state_rate_hz", self.state_rate_hz),
            ("max_weight", self.max_weight),
            ("tau_e", self.tau_e),
            ("trace_step_ms", self.trace_step_ms),
            ("learning_rate", self.learning_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let (lo, hi) = self.recruitment_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::param("recruitment_range", "need 0 < lo <= hi"));
        }
        if !(self.initial_weight >= 0.0 && self.initial_weight + self.initial_jitter <= self.max_weight) {
            return Err(Error::param(
                "initial_weight",
                "initial weights must lie in [0, max_weight]",
            ));
        }
        for (name, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::param(name, "must lie in [0, 1]"));
            }
        }
        if self.trace_step_ms > self.tau_e && self.trace_decay == TraceDecay::Euler {
            return Err(Error::param(
                "trace_step_ms",
                "Euler trace decay needs trace_step_ms <= tau_e",
            ));
        }
        Ok(())
    }

    /// Linear anneal from `epsilon_start` to `epsilon_end`.
    pub fn epsilon(&self, episode: usize) -> f64 {
        if self.epsilon_anneal_episodes == 0 || episode >= self.epsilon_anneal_episodes {
            return self.epsilon_end;
        }
        let f = episode as f64 / self.epsilon_anneal_episodes as f64;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * f
    }
}

/// Index of the largest count; ties are broken uniformly with `rng`.
pub fn vote<R: Rng + ?Sized>(counts: &[usize; 4], rng: &mut R) -> usize {
    let best = counts.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..4).filter(|&i| counts[i] == best).collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub action: Action,
    pub counts: [usize; 4],
    /// True when the action came from the exploration draw instead of the vote.
    pub explored: bool,
}

#[derive(Debug, Clone)]
pub struct DecisionNetwork {
    pub params: DecisionParams,
    pub grid_width: usize,
    pub grid_height: usize,
    pub state_pop: NeuronPopulation,
    pub action_pops: [NeuronPopulation; 4],
    pub w_dm: SynapticMatrix,
    pub trace: EligibilityTrace,
    /// Input gain of every action neuron (group-major).
    action_gains: Vec<f64>,
    state_drive: f64,
    execution_deposit: f64,
}

impl DecisionNetwork {
    pub fn new(params: DecisionParams, grid_width: usize, grid_height: usize) -> Result<Self> {
        params.validate()?;
        if grid_width == 0 || grid_height == 0 {
            return Err(Error::param("grid", "grid must be at least 1x1"));
        }
        let n_state = grid_width * grid_height * 2;
        let n_action = 4 * params.group_size;
        let mut w_dm = SynapticMatrix::with_bounds(
            n_state,
            n_action,
            SynapseSign::Excitatory,
            (0.0, params.max_weight),
            params.initial_weight,
        )?;
        let mut rng = stream(params.seed, "decision-init", 0);
        let j = params.initial_jitter;
        for pre in 0..n_state {
            for w in w_dm.row_mut(pre) {
                *w = params.initial_weight + if j > 0.0 { rng.random_range(-j..=j) } else { 0.0 };
            }
        }
        w_dm.clip();
        let mut trace = EligibilityTrace::for_matrix(&w_dm, params.tau_e);
        trace.decay = params.trace_decay;
        let mk = |id: u16| NeuronPopulation::new(id, params.group_size, params.lif);
        let action_pops = [
            mk(ACTION_POP_ID_BASE)?,
            mk(ACTION_POP_ID_BASE + 1)?,
            mk(ACTION_POP_ID_BASE + 2)?,
            mk(ACTION_POP_ID_BASE + 3)?,
        ];
        let mut net = Self {
            action_gains: recruitment_gains(&params),
            state_drive: current_for_rate(&params.lif, params.state_rate_hz),
            state_pop: NeuronPopulation::new(STATE_POP_ID, n_state, params.lif)?,
            action_pops,
            w_dm,
            trace,
            params,
            grid_width,
            grid_height,
            execution_deposit: 0.0,
        };
        net.execution_deposit = net.execution_stdp();
        Ok(net)
    }

    pub fn state_index(&self, obs: StateObservation) -> Result<usize> {
        encode_state(obs, self.grid_width, self.grid_height)
    }

    /// Simulates the vote window for `obs` and returns per-group spike counts.
    pub fn vote_counts(&self, obs: StateObservation) -> Result<[usize; 4]> {
        let s = self.state_index(obs)?;
        let p = &self.params;
        let mut state = self.state_pop.clone();
        state.reset_state();
        let mut groups = self.action_pops.clone();
        groups.iter_mut().for_each(NeuronPopulation::reset_state);
        let g = p.group_size;
        let mut drive = vec![0.0; state.size()];
        drive[s] = self.state_drive;
        let row = self.w_dm.row(s);
        let mut input = vec![0.0; g];
        let mut state_spikes = Vec::new();
        let mut fired = Vec::new();
        let mut counts = [0usize; 4];
        let mut state_fired_last = false;
        for _ in 0..(p.vote_ms / p.lif.dt).round() as usize {
            for (k, pop) in groups.iter_mut().enumerate() {
                if state_fired_last {
                    for (i, c) in input.iter_mut().enumerate() {
                        *c = row[k * g + i] * self.action_gains[k * g + i];
                    }
                } else {
                    input.fill(0.0);
                }
                fired.clear();
                pop.step_into(&input, &mut fired)?;
                counts[k] += fired.len();
            }
            state_spikes.clear();
            state.step_into(&drive, &mut state_spikes)?;
            state_fired_last = !state_spikes.is_empty();
        }
        Ok(counts)
    }

    /// Vote (with `epsilon` exploration), then run the execution window and
    /// fold its STDP into the eligibility trace.
    pub fn select_action<R: Rng + ?Sized>(
        &mut self,
        obs: StateObservation,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Selection> {
        let counts = self.vote_counts(obs)?;
        let voted = vote(&counts, rng);
        let explore = rng.random::<f64>() < epsilon;
        let idx = if explore { rng.random_range(0..4) } else { voted };
        let action = Action::from_index(idx).unwrap_or(Action::Up);
        self.deposit_execution(obs, action)?;
        Ok(Selection {
            action,
            counts,
            explored: explore,
        })
    }

    /// Greedy choice without exploration; ties go to the larger mean weight, then
    /// to the lower action index.
    pub fn greedy_action(&self, obs: StateObservation) -> Result<Action> {
        let counts = self.vote_counts(obs)?;
        let means = self.group_means(self.state_index(obs)?);
        let best = (0..4)
            .max_by(|&a, &b| {
                counts[a]
                    .cmp(&counts[b])
                    .then(means[a].total_cmp(&means[b]))
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        Ok(Action::from_index(best).unwrap_or(Action::Up))
    }

    /// STDP of the execution window: the state neuron keeps firing and the
    /// executed group follows each state spike one tick later.
    pub fn execution_stdp(&self) -> f64 {
        let p = &self.params;
        let mut state = NeuronPopulation::new(STATE_POP_ID, 1, p.lif).expect("validated parameters");
        let total = ((p.vote_ms + p.execution_ms) / p.lif.dt).round() as usize;
        let start = p.vote_ms;
        let mut pre = Vec::new();
        for _ in 0..total {
            if !state.step(&[self.state_drive]).expect("finite drive").is_empty() && state.time() > start {
                pre.push(state.time());
            }
        }
        let end = p.vote_ms + p.execution_ms;
        let post: Vec<f64> = pre.iter().map(|t| t + p.lif.dt).filter(|&t| t <= end).collect();
        stdp_between(&pre, &post, &p.plasticity)
    }

    fn deposit_execution(&mut self, obs: StateObservation, action: Action) -> Result<()> {
        let s = self.state_index(obs)?;
        let g = self.params.group_size;
        let dw = self.execution_deposit;
        let mut row = vec![0.0; 4 * g];
        row[action.index() * g..(action.index() + 1) * g].fill(dw);
        self.trace.update_row(s, &row, self.params.trace_step_ms)
    }

    /// `w += learning_rate * r_moral * e`, clipped.
    pub fn learn_step(&mut self, reward: &MoralReward) -> Result<()> {
        apply_reward(&mut self.w_dm, &self.trace, self.params.learning_rate * reward.r_moral)
    }

    /// Zeroes the eligibility trace.
    pub fn reset_episode(&mut self) {
        self.trace.reset();
    }

    /// Mean weight from state `s` onto each action group.
    pub fn group_means(&self, s: usize) -> [f64; 4] {
        let g = self.params.group_size;
        let row = self.w_dm.row(s);
        let mut m = [0.0; 4];
        for (k, v) in m.iter_mut().enumerate() {
            *v = row[k * g..(k + 1) * g].iter().sum::<f64>() / g as f64;
        }
        m
    }

    /// `x,y,o_emp,best_action,best_weight` for every state neuron.
    pub fn policy_map_csv(&self) -> String {
        let mut out = String::from("x,y,o_emp,best_action,best_weight\n");
        for o_emp in [0i8, -1] {
            for y in 0..self.grid_height {
                for x in 0..self.grid_width {
                    let obs = StateObservation { x, y, o_emp };
                    let s = encode_state(obs, self.grid_width, self.grid_height).unwrap_or(0);
                    let m = self.group_means(s);
                    let best = (0..4).fold(0, |b, k| if m[k] > m[b] { k } else { b });
                    let name = Action::from_index(best).map(Action::name).unwrap_or("up");
                    let _ = writeln!(out, "{x},{y},{o_emp},{name},{}", m[best]);
                }
            }
        }
        out
    }
}

/// Gains that make neuron `i` of a group follow the state neuron once the
/// weight reaches its recruitment threshold, with thresholds spread linearly
/// over `recruitment_range`.
fn recruitment_gains(p: &DecisionParams) -> Vec<f64> {
    let (lo, hi) = p.recruitment_range;
    let g = p.group_size;
    // A one-tick pulse of this current per unit weight lifts V from rest to threshold.
    let unit = (p.lif.threshold - p.lif.resting_potential)
        / (p.lif.dt / p.lif.membrane_time_constant)
        / p.lif.membrane_resistance;
    let per_group: Vec<f64> = (0..g)
        .map(|i| {
            let theta = if g == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (g - 1) as f64
            };
            unit / theta
        })
        .collect();
    (0..4).flat_map(|_| per_group.iter().copied()).collect()
}

#[cfg(test)]
mod tests;
