use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{LayoutGenerator, Scenario};
use super::{offset, Action, AgentId, Cell, CueColor, Emotion, OutwardCue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutMode {
    /// The fixed 8x8 demo layout, see [`Scenario::demo`].
    #[default]
    Demo,
    /// A fresh layout from [`LayoutGenerator`] on every `reset`.
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub layout: LayoutMode,
    pub generator: LayoutGenerator,
    /// Start A on a uniformly drawn free cell (outside B's region) each episode.
    pub random_a_start: bool,
}

/// Samples a scenario according to `config` and returns it with a fresh episode state.
pub fn reset<R: Rng + ?Sized>(scenario_rng: &mut R, config: &EnvConfig) -> Result<(Scenario, WorldState)> {
    let scenario = match config.layout {
        LayoutMode::Demo => Scenario::demo(),
        LayoutMode::Randomized => {
            let seed = scenario_rng.random();
            config.generator.sample(scenario_rng, seed)?
        }
    };
    let state = WorldState::initial(&scenario);
    Ok((scenario, state))
}

/// Dynamic part of the world for one episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub a_pos: Cell,
    pub b_pos: Cell,
    pub b_emotion: Emotion,
    pub b_color: OutwardCue,
    pub step_index: usize,
    pub episode_done: bool,
    pub distress_onset_step: Option<usize>,
    pub distress_relieved_step: Option<usize>,
}

impl WorldState {
    pub fn initial(scenario: &Scenario) -> Self {
        Self::starting_at(scenario, scenario.a_start)
    }

    pub fn starting_at(scenario: &Scenario, a_pos: Cell) -> Self {
        Self {
            a_pos,
            b_pos: scenario.b_start,
            b_emotion: Emotion::Normal,
            b_color: OutwardCue::green(AgentId::B),
            step_index: 0,
            episode_done: false,
            distress_onset_step: None,
            distress_relieved_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventSet {
    pub reached_t: bool,
    pub reached_h: bool,
    pub distress_onset: bool,
    pub distress_relieved: bool,
}

impl EventSet {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Pipe-separated event names, empty when nothing happened.
impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            (self.reached_t, "reached_T"),
            (self.reached_h, "reached_H"),
            (self.distress_onset, "distress_onset"),
            (self.distress_relieved, "distress_relieved"),
        ];
        let mut first = true;
        for (_, name) in names.iter().filter(|(on, _)| *on) {
            if !first {
                f.write_str("|")?;
            }
            f.write_str(name)?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub a_pos: Cell,
    pub b_pos: Cell,
    pub r_self_task: f64,
    pub b_cue: OutwardCue,
    pub events: EventSet,
    pub done: bool,
}

pub const STEP_COST: f64 = -1.0;
pub const TASK_REWARD: f64 = 10.0;

/// A scenario plus the running episode.
#[derive(Debug, Clone)]
pub struct GridWorld {
    scenario: Scenario,
    state: WorldState,
}

impl GridWorld {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let state = WorldState::initial(&scenario);
        Ok(Self { scenario, state })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// Starts a new episode with A at the scenario's start cell.
    pub fn reset_episode(&mut self) -> &WorldState {
        self.state = WorldState::initial(&self.scenario);
        &self.state
    }

    /// Starts a new episode with A at `a_pos`.
    pub fn reset_episode_at(&mut self, a_pos: Cell) -> Result<&WorldState> {
        if !self.scenario.is_free(a_pos)
            || a_pos == self.scenario.t_goal
            || self.scenario.danger_cells.contains(&a_pos)
            || a_pos == self.scenario.b_start
        {
            return Err(Error::InvalidScenario(format!("{a_pos:?} is not a valid start for A")));
        }
        self.state = WorldState::starting_at(&self.scenario, a_pos);
        Ok(&self.state)
    }

    /// Cells A may start from when starts are randomised: free, outside B's
    /// region, at least two steps from T, and with H off every shortest path to
    /// T, so helping always costs a detour.
    pub fn a_start_candidates(&self) -> Vec<Cell> {
        let s = &self.scenario;
        let w = s.grid_width;
        let to_t = s.distances_from(s.t_goal);
        let to_h = s.distances_from(s.h_goal);
        let h_to_t = to_t[s.h_goal.1 * w + s.h_goal.0];
        s.free_cells()
            .filter(|&c| !s.danger_cells.contains(&c) && c != s.b_start && c != s.h_goal)
            .filter(|&c| s.b_region.is_none() || !s.in_b_region(c))
            .filter(|&c| {
                let i = c.1 * w + c.0;
                match (to_t[i], to_h[i], h_to_t) {
                    (Some(dt), Some(dh), Some(ht)) => dt >= 2 && dh + ht > dt,
                    _ => false,
                }
            })
            .collect()
    }

    /// Advances one step: A moves, H/T are checked, then B walks and may
    /// become distressed.
    pub fn step<R: Rng + ?Sized>(&mut self, a_action: Action, b_rng: &mut R) -> Result<StepOutcome> {
        let s = &self.scenario;
        let st = &mut self.state;
        if st.episode_done {
            return Err(Error::EpisodeFinished(st.step_index));
        }
        let mut events = EventSet::default();
        let mut r = STEP_COST;

        if let Some(next) = offset(st.a_pos, a_action, s.grid_width, s.grid_height) {
            if !s.walls.contains(&next) {
                st.a_pos = next;
            }
        }
        if st.a_pos == s.h_goal {
            events.reached_h = true;
            if st.b_emotion == Emotion::Negative {
                events.distress_relieved = true;
                st.b_emotion = Emotion::Normal;
                st.distress_relieved_step = Some(st.step_index);
            }
        }
        if st.a_pos == s.t_goal {
            events.reached_t = true;
            r += TASK_REWARD;
            st.episode_done = true;
        }

        if !st.episode_done {
            let moves: Vec<Cell> = s.free_neighbors(st.b_pos).filter(|&c| s.in_b_region(c)).collect();
            if let Some(&next) = moves.choose(b_rng) {
                st.b_pos = next;
            }
            if s.danger_cells.contains(&st.b_pos) && st.b_emotion == Emotion::Normal && st.distress_onset_step.is_none()
            {
                events.distress_onset = true;
                st.b_emotion = Emotion::Negative;
                st.distress_onset_step = Some(st.step_index);
            }
        }

        st.b_color = OutwardCue::of(st.b_emotion, AgentId::B);
        st.step_index += 1;
        if st.step_index >= s.step_budget {
            st.episode_done = true;
        }
        debug_assert_eq!(st.b_color.color == CueColor::Red, st.b_emotion == Emotion::Negative);
        Ok(StepOutcome {
            a_pos: st.a_pos,
            b_pos: st.b_pos,
            r_self_task: r,
            b_cue: st.b_color,
            events,
            done: st.episode_done,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn world(text: &str) -> GridWorld {
        GridWorld::new(Scenario::from_text(text).unwrap()).unwrap()
    }

    #[test]
    fn demo_reset_is_identical() {
        let cfg = EnvConfig::default();
        let (a, sa) = reset(&mut stream(1, "s", 0), &cfg).unwrap();
        let (b, sb) = reset(&mut stream(2, "s", 0), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn reaching_t_pays_nine_and_ends() {
        let mut w = world("seed: 0\nbudget: 10\nb_region: none\nAT.\nB.H\n");
        let out = w.step(Action::Right, &mut stream(0, "b", 0)).unwrap();
        assert_eq!(out.r_self_task, 9.0);
        assert!(out.done && out.events.reached_t);
        assert!(matches!(
            w.step(Action::Right, &mut stream(0, "b", 0)),
            Err(Error::EpisodeFinished(1))
        ));
    }

    #[test]
    fn wall_and_edge_moves_are_noops() {
        let mut w = world("seed: 0\nbudget: 10\nb_region: none\nA#T\n..H\nB..\n");
        let mut rng = stream(0, "b", 0);
        let out = w.step(Action::Right, &mut rng).unwrap();
        assert_eq!((out.a_pos, out.r_self_task), ((0, 0), -1.0));
        let out = w.step(Action::Up, &mut rng).unwrap();
        assert_eq!((out.a_pos, out.r_self_task), ((0, 0), -1.0));
    }

    #[test]
    fn demo_distress_begins_on_first_step_and_h_relieves() {
        let mut w = GridWorld::new(Scenario::demo()).unwrap();
        let mut rng = stream(5, "b", 0);
        let out = w.step(Action::Up, &mut rng).unwrap();
        assert!(out.events.distress_onset);
        assert_eq!(out.b_cue.color, CueColor::Red);
        // (1,3) -> (1,2) -> (2,2) = H
        w.step(Action::Up, &mut rng).unwrap();
        let out = w.step(Action::Right, &mut rng).unwrap();
        assert!(out.events.reached_h && out.events.distress_relieved);
        assert_eq!(out.b_cue.color, CueColor::Green);
        assert_eq!(out.events.to_string(), "reached_H|distress_relieved");
        // no second onset in the same episode
        for _ in 0..5 {
            let out = w.step(Action::Left, &mut rng).unwrap();
            assert!(!out.events.distress_onset);
        }
    }

    #[test]
    fn h_without_distress_gives_nothing() {
        let mut w = world("seed: 0\nbudget: 10\nb_region: none\nAH.\nB.T\n");
        let out = w.step(Action::Right, &mut stream(0, "b", 0)).unwrap();
        assert!(out.events.reached_h && !out.events.distress_relieved);
        assert_eq!(out.r_self_task, -1.0);
    }

    #[test]
    fn budget_ends_episode() {
        let mut w = world("seed: 0\nbudget: 3\nb_region: none\nA.T\nB.H\n");
        let mut rng = stream(0, "b", 0);
        for i in 0..3 {
            let out = w.step(Action::Left, &mut rng).unwrap();
            assert_eq!(out.done, i == 2);
        }
    }

    #[test]
    fn randomized_reset_differs_by_seed() {
        let cfg = EnvConfig {
            layout: LayoutMode::Randomized,
            ..Default::default()
        };
        let (a, _) = reset(&mut stream(9, "s", 0), &cfg).unwrap();
        let (b, _) = reset(&mut stream(9, "s", 0), &cfg).unwrap();
        assert_eq!(a, b);
        let (c, _) = reset(&mut stream(10, "s", 0), &cfg).unwrap();
        assert_ne!(a, c);
    }
}
