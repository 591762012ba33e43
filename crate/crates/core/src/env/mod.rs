//! Two-agent moral-dilemma gridworld.
//!
//! Agent A (the learner) pursues its own goal `T`. Agent B wanders inside its
//! sub-region next to danger cells; the first time it steps onto a danger cell
//! it becomes distressed and its outward colour turns red. The distress lasts
//! until A steps onto the helping goal `H`.
//!
//! Coordinates are `(x, y)` = (column, row) with the origin at the top-left;
//! `Up` decreases `y`.

mod scenario;
mod world;

pub use scenario::{LayoutGenerator, Scenario};
pub use world::{reset, EnvConfig, EventSet, GridWorld, LayoutMode, StepOutcome, WorldState, STEP_COST, TASK_REWARD};

use serde::{Deserialize, Serialize};

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Action> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Normal,
    Negative,
}

impl Emotion {
    pub fn name(self) -> &'static str {
        match self {
            Emotion::Normal => "normal",
            Emotion::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueColor {
    Green,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentId {
    A,
    B,
}

/// What an observer can see of another agent: its colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutwardCue {
    pub color: CueColor,
    pub source_agent: AgentId,
}

impl OutwardCue {
    pub fn of(emotion: Emotion, source_agent: AgentId) -> Self {
        let color = match emotion {
            Emotion::Normal => CueColor::Green,
            Emotion::Negative => CueColor::Red,
        };
        Self { color, source_agent }
    }

    pub fn red(source_agent: AgentId) -> Self {
        Self {
            color: CueColor::Red,
            source_agent,
        }
    }

    pub fn green(source_agent: AgentId) -> Self {
        Self {
            color: CueColor::Green,
            source_agent,
        }
    }
}

pub(crate) fn offset(cell: Cell, action: Action, width: usize, height: usize) -> Option<Cell> {
    let (dx, dy) = action.delta();
    let x = cell.0 as i64 + dx;
    let y = cell.1 as i64 + dy;
    (x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height).then_some((x as usize, y as usize))
}
