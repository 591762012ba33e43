use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::decision::{DecisionNetwork, MoralReward, StateObservation};
use crate::empathy::{EmpathyLevel, EmpathyNetwork, Inference};
use crate::env::{self, Action, AgentId, CueColor, Emotion, GridWorld, OutwardCue, Scenario};
use crate::error::Result;
use crate::neuromodulation::{peak_relief_da, DopamineCircuit, RpePredictor};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: usize,
    /// A reached H while B was distressed.
    pub altruistic: bool,
    /// B became distressed during the episode.
    pub distressed: bool,
    pub reached_t: bool,
    /// Sum of step costs (negative step count).
    pub cost: f64,
    /// Sum of task rewards.
    pub task_return: f64,
    /// Sum of moral rewards.
    pub moral_return: f64,
    /// Dopamine reward on the relief step, 0 without relief.
    pub da_relief: f64,
    pub steps: usize,
    /// BFS distance from A to H on the onset step.
    pub distance_to_h_at_onset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub a_x: usize,
    pub a_y: usize,
    pub b_x: usize,
    pub b_y: usize,
    pub b_emotion: Emotion,
    pub action: Action,
    pub r_self_task: f64,
    pub events: String,
    pub da_in_emp: f64,
    pub r_moral: f64,
}

/// Empathy readout and dopamine signal for one cue colour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueResponse {
    pub o_emp: i8,
    pub negative_emotion_hz: f64,
    pub mirror_hz: f64,
    /// Normalised dopamine rate.
    pub s: f64,
}

/// An agent ready for the decision phase: trained empathy, dopamine circuit,
/// fresh decision network and predictor.
#[derive(Debug, Clone)]
pub struct Agent {
    pub empathy: EmpathyNetwork,
    pub level: EmpathyLevel,
    pub dopamine: DopamineCircuit,
    pub decision: DecisionNetwork,
    pub rpe: RpePredictor,
    pub red: CueResponse,
    pub green: CueResponse,
}

impl Agent {
    pub fn new(
        config: &ExperimentConfig,
        empathy: EmpathyNetwork,
        level: EmpathyLevel,
        scenario: &Scenario,
    ) -> Result<Self> {
        let per = empathy.params.neurons_per_category;
        let dopamine = DopamineCircuit::new(config.dopamine, per)?;
        let window = empathy.params.inference_ms;
        let respond = |inf: Inference| -> Result<CueResponse> {
            Ok(CueResponse {
                o_emp: inf.o_emp,
                negative_emotion_hz: inf.rates.emotion[0],
                mirror_hz: inf.rates.mirror[0].max(inf.rates.mirror[1]),
                // Sub-threshold emotion activity does not reach the dopamine
                // circuit: only a recognised distress signal inhibits it.
                s: if inf.o_emp < 0 {
                    dopamine.measure_da_rate(&inf.trains.emotion[..per], window)?
                } else {
                    1.0
                },
            })
        };
        let red = respond(empathy.infer_emotion(OutwardCue::red(AgentId::B))?)?;
        let green = respond(empathy.infer_emotion(OutwardCue::green(AgentId::B))?)?;
        let decision = DecisionNetwork::new(config.decision, scenario.grid_width, scenario.grid_height)?;
        Ok(Self {
            empathy,
            level,
            dopamine,
            decision,
            rpe: RpePredictor::new(config.rpe.alpha, config.rpe.beta),
            red,
            green,
        })
    }

    pub fn response(&self, cue: OutwardCue) -> &CueResponse {
        match cue.color {
            CueColor::Red => &self.red,
            CueColor::Green => &self.green,
        }
    }

    /// Relief dopamine after full adaptation to the distress signal.
    pub fn peak_relief_da(&self) -> f64 {
        peak_relief_da(self.rpe.alpha, self.red.s)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub scenario: Scenario,
    pub agent: Agent,
    pub metrics: Vec<EpisodeMetrics>,
    pub steps: Vec<StepRecord>,
}

/// Decision-phase training: per step, read B's cue through the empathy network,
/// vote, act, turn the dopamine rate into an RPE reward and apply R-STDP.
pub fn run_training(config: &ExperimentConfig, empathy: EmpathyNetwork, level: EmpathyLevel) -> Result<TrainingRun> {
    config.validate()?;
    let seed = config.seed;
    let (scenario, _) = env::reset(&mut stream(seed, "scenario", 0), &config.env)?;
    let mut agent = Agent::new(config, empathy, level, &scenario)?;
    let mut world = GridWorld::new(scenario.clone())?;
    let start_cells = world.a_start_candidates();
    let mut b_rng = stream(seed, "b-walk", 0);
    let mut act_rng = stream(seed, "action", 0);
    let mut start_rng = stream(seed, "a-start", 0);
    let episodes = config.training.episodes;
    let log_from = episodes.saturating_sub(config.training.logged_episodes);
    let h_dist = scenario.distances_from(scenario.h_goal);
    let mut metrics = Vec::with_capacity(episodes);
    let mut steps = Vec::new();

    agent.rpe.reset();
    for episode in 0..episodes {
        if config.env.random_a_start {
            let &cell = start_cells.choose(&mut start_rng).unwrap_or(&scenario.a_start);
            world.reset_episode_at(cell)?;
        } else {
            world.reset_episode();
        }
        agent.decision.reset_episode();
        let epsilon = config.decision.epsilon(episode);
        let mut m = EpisodeMetrics {
            episode,
            altruistic: false,
            distressed: false,
            reached_t: false,
            cost: 0.0,
            task_return: 0.0,
            moral_return: 0.0,
            da_relief: 0.0,
            steps: 0,
            distance_to_h_at_onset: None,
        };
        while !world.state().episode_done {
            let st = world.state().clone();
            let obs = StateObservation::new(st.a_pos, agent.response(st.b_color).o_emp);
            let sel = agent.decision.select_action(obs, epsilon, &mut act_rng)?;
            let out = world.step(sel.action, &mut b_rng)?;
            let da = agent.rpe.update(agent.response(out.b_cue).s);
            let reward = MoralReward::new(out.r_self_task, da);
            agent.decision.learn_step(&reward)?;

            m.steps += 1;
            m.cost += -1.0;
            m.task_return += out.r_self_task;
            m.moral_return += reward.r_moral;
            if out.events.distress_onset {
                m.distressed = true;
                m.distance_to_h_at_onset = h_dist[out.a_pos.1 * scenario.grid_width + out.a_pos.0];
            }
            if out.events.distress_relieved {
                m.altruistic = true;
                m.da_relief = da;
            }
            m.reached_t |= out.events.reached_t;
            if episode >= log_from {
                steps.push(StepRecord {
                    episode,
                    step: st.step_index,
                    a_x: out.a_pos.0,
                    a_y: out.a_pos.1,
                    b_x: out.b_pos.0,
                    b_y: out.b_pos.1,
                    b_emotion: world.state().b_emotion,
                    action: sel.action,
                    r_self_task: out.r_self_task,
                    events: out.events.to_string(),
                    da_in_emp: reward.da_in_emp,
                    r_moral: reward.r_moral,
                });
            }
        }
        metrics.push(m);
    }
    Ok(TrainingRun {
        scenario,
        agent,
        metrics,
        steps,
    })
}

pub fn episodes_csv(metrics: &[EpisodeMetrics]) -> String {
    let mut out = String::from(
        "episode,altruistic,distressed,reached_t,cost,task_return,moral_return,da_relief,steps,distance_to_h_at_onset\n",
    );
    for m in metrics {
        let d = m.distance_to_h_at_onset.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            m.episode,
            u8::from(m.altruistic),
            u8::from(m.distressed),
            u8::from(m.reached_t),
            m.cost,
            m.task_return,
            m.moral_return,
            m.da_relief,
            m.steps,
            d
        );
    }
    out
}

pub fn steps_csv(steps: &[StepRecord]) -> String {
    let mut out = String::from("episode,step,a_x,a_y,b_x,b_y,b_emotion,action,r_self_task,events,da_in_emp,r_moral\n");
    for s in steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.episode,
            s.step,
            s.a_x,
            s.a_y,
            s.b_x,
            s.b_y,
            s.b_emotion.name(),
            s.action.name(),
            s.r_self_task,
            s.events,
            s.da_in_emp,
            s.r_moral
        );
    }
    out
}

/// Altruistic episodes per reporting window.
pub fn windowed_altruism(metrics: &[EpisodeMetrics], window: usize) -> Vec<usize> {
    metrics
        .chunks(window.max(1))
        .map(|c| c.iter().filter(|m| m.altruistic).count())
        .collect()
}

/// Summary over the trailing `n` episodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergedSummary {
    pub episodes: usize,
    pub altruistic: usize,
    pub distressed: usize,
    /// Altruistic episodes per `window` episodes.
    pub altruistic_per_window: f64,
    /// Altruistic share of distressed episodes.
    pub altruism_rate: f64,
    pub mean_cost: f64,
}

pub fn converged_summary(metrics: &[EpisodeMetrics], n: usize, window: usize) -> ConvergedSummary {
    let tail = &metrics[metrics.len().saturating_sub(n)..];
    let altruistic = tail.iter().filter(|m| m.altruistic).count();
    let distressed = tail.iter().filter(|m| m.distressed).count();
    let len = tail.len().max(1) as f64;
    ConvergedSummary {
        episodes: tail.len(),
        altruistic,
        distressed,
        altruistic_per_window: altruistic as f64 * window as f64 / len,
        altruism_rate: if distressed == 0 {
            0.0
        } else {
            altruistic as f64 / distressed as f64
        },
        mean_cost: tail.iter().map(|m| m.cost).sum::<f64>() / len,
    }
}
